#pragma once

// The two corpus-level indices read at every hop: a sparse BM25 index over
// entities (surface + role/state text) and a dense vector index over all QA
// pairs. Both are immutable after build and safe for concurrent queries;
// incremental growth happens by rebuilding and swapping whole values.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gsw/core.hpp"
#include "gsw/embedder.hpp"

namespace gsw {

struct IndexParams {
    double k1 = 1.2;
    double b = 0.75;
    // rendering embedded for each QA pair (also the rerank candidate text)
    std::string qa_text_template = "Q: {question} A: {answer}";
};

inline std::string render_qa_text(const QaPair& pair, const IndexParams& params) {
    std::string out = params.qa_text_template;
    auto replace_all = [&](const std::string& token, const std::string& value) {
        size_t pos = 0;
        while ((pos = out.find(token, pos)) != std::string::npos) {
            out.replace(pos, token.size(), value);
            pos += value.size();
        }
    };
    replace_all("{question}", pair.question);
    replace_all("{answer}", pair.answer_text);
    return out;
}

// One dense-index row: the pair plus everything retrieval needs without going
// back to the workspace store.
struct IndexedQaPair {
    QaPair pair;
    std::string ws_doc_id;
    std::string ws_title;
    std::vector<std::string> linked_entity_ids;       // answer entities + verb participants
    std::vector<std::string> answer_entity_surfaces;  // resolved surfaces, pair order
};

// Canonical row enumeration: workspace order (doc_id ascending), then QA
// order within each workspace. Both index builders rely on it.
inline std::vector<IndexedQaPair> enumerate_qa_rows(const Corpus& corpus) {
    std::vector<IndexedQaPair> rows;
    for (const auto& [doc_id, ws] : corpus.workspaces) {
        for (const auto& qa : ws.qa_pairs) {
            IndexedQaPair row;
            row.pair = qa;
            row.ws_doc_id = ws.doc_id;
            row.ws_title = ws.title;
            std::set<std::string> linked(qa.answer_entity_ids.begin(), qa.answer_entity_ids.end());
            if (const VerbPhraseNode* v = ws.find_verb(qa.verb_id))
                linked.insert(v->participant_ids.begin(), v->participant_ids.end());
            row.linked_entity_ids.assign(linked.begin(), linked.end());
            for (const auto& eid : qa.answer_entity_ids)
                if (const EntityNode* e = ws.find_entity(eid)) row.answer_entity_surfaces.push_back(e->surface);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// sparse entity index

struct EntityEntry {
    std::string ws_doc_id;
    std::string entity_id;
    std::string surface;
    int length = 0;                  // token count of surface + roles + states
    std::vector<int> attached_rows;  // QA rows linked to this entity
};

struct EntityIndex {
    double k1 = 1.2;
    double b = 0.75;
    std::vector<EntityEntry> entries;
    // token -> (entry index, term frequency), entry indices ascending
    std::map<std::string, std::vector<std::pair<int, int>>> postings;
    double avgdl = 0.0;

    size_t size() const { return entries.size(); }
    int df(const std::string& token) const {
        auto it = postings.find(token);
        return it == postings.end() ? 0 : static_cast<int>(it->second.size());
    }
};

inline std::string entity_entry_text(const EntityNode& e) {
    std::string text = e.surface;
    for (const auto& r : e.roles) {
        text += " " + r.role;
        for (const auto& s : r.states) text += " " + s;
    }
    return text;
}

inline EntityIndex build_entity_index(const Corpus& corpus, const IndexParams& params = {}) {
    EntityIndex idx;
    idx.k1 = params.k1;
    idx.b = params.b;

    auto rows = enumerate_qa_rows(corpus);
    // (ws, entity) -> attached rows
    std::map<std::pair<std::string, std::string>, std::vector<int>> attached;
    for (size_t r = 0; r < rows.size(); ++r)
        for (const auto& eid : rows[r].linked_entity_ids)
            attached[{rows[r].ws_doc_id, eid}].push_back(static_cast<int>(r));

    long total_len = 0;
    for (const auto& [doc_id, ws] : corpus.workspaces) {
        for (const auto& e : ws.entities) {
            EntityEntry entry;
            entry.ws_doc_id = ws.doc_id;
            entry.entity_id = e.id;
            entry.surface = e.surface;
            auto tokens = tokenize(entity_entry_text(e));
            entry.length = static_cast<int>(tokens.size());
            total_len += entry.length;
            auto it = attached.find({ws.doc_id, e.id});
            if (it != attached.end()) entry.attached_rows = it->second;
            int entry_index = static_cast<int>(idx.entries.size());
            std::map<std::string, int> tf;
            for (const auto& t : tokens) ++tf[t];
            for (const auto& [tok, n] : tf) idx.postings[tok].push_back({entry_index, n});
            idx.entries.push_back(std::move(entry));
        }
    }
    idx.avgdl = idx.entries.empty() ? 0.0 : static_cast<double>(total_len) / static_cast<double>(idx.entries.size());
    return idx;
}

struct EntityHit {
    int entry = -1;
    double score = 0.0;
};

// Classical BM25 with the index's (k1, b). The idf uses the strictly positive
// ln(1 + (N - df + 0.5)/(df + 0.5)) form; query tokens contribute with
// multiplicity. Ties break by (workspace id, entity id) ascending.
inline std::vector<EntityHit> entity_search(const EntityIndex& idx, const std::string& query, int top_k) {
    if (top_k < 1) throw ContractError("entity_search: top_k must be >= 1");
    if (idx.entries.empty()) return {};
    double n_entries = static_cast<double>(idx.entries.size());

    std::map<int, double> scores;
    for (const auto& tok : tokenize(query)) {
        auto it = idx.postings.find(tok);
        if (it == idx.postings.end()) continue;
        double df = static_cast<double>(it->second.size());
        double idf = std::log(1.0 + (n_entries - df + 0.5) / (df + 0.5));
        for (const auto& [entry, tf] : it->second) {
            double len = static_cast<double>(idx.entries[static_cast<size_t>(entry)].length);
            double denom = tf + idx.k1 * (1.0 - idx.b + idx.b * len / idx.avgdl);
            scores[entry] += idf * (tf * (idx.k1 + 1.0)) / denom;
        }
    }
    std::vector<EntityHit> hits;
    hits.reserve(scores.size());
    for (const auto& [entry, score] : scores) hits.push_back({entry, score});
    std::sort(hits.begin(), hits.end(), [&](const EntityHit& a, const EntityHit& b) {
        if (a.score != b.score) return a.score > b.score;
        const auto& ea = idx.entries[static_cast<size_t>(a.entry)];
        const auto& eb = idx.entries[static_cast<size_t>(b.entry)];
        if (ea.ws_doc_id != eb.ws_doc_id) return ea.ws_doc_id < eb.ws_doc_id;
        return ea.entity_id < eb.entity_id;
    });
    if (static_cast<int>(hits.size()) > top_k) hits.resize(static_cast<size_t>(top_k));
    return hits;
}

// ---------------------------------------------------------------------------
// dense QA-pair index

struct EmbedderInfo {
    std::string name;
    int dimension = 0;

    bool operator==(const EmbedderInfo&) const = default;
};

struct QaVectorIndex {
    EmbedderInfo embedder;
    int rows = 0;
    int dim = 0;
    std::vector<float> data;  // row-major, unit-normalized
    std::vector<IndexedQaPair> pairs;

    const float* row(int r) const { return data.data() + static_cast<size_t>(r) * static_cast<size_t>(dim); }
};

inline QaVectorIndex build_qa_index(const Corpus& corpus, Embedder& embedder, const IndexParams& params = {}) {
    if (embedder.dimension() <= 0) throw ContractError("embedder dimension must be positive");
    QaVectorIndex idx;
    idx.embedder = {embedder.name(), embedder.dimension()};
    idx.dim = embedder.dimension();
    idx.pairs = enumerate_qa_rows(corpus);
    idx.rows = static_cast<int>(idx.pairs.size());
    idx.data.resize(static_cast<size_t>(idx.rows) * static_cast<size_t>(idx.dim), 0.0f);

    std::vector<std::string> texts;
    texts.reserve(idx.pairs.size());
    for (const auto& row : idx.pairs) texts.push_back(render_qa_text(row.pair, params));

    constexpr size_t kBatch = 256;
    for (size_t start = 0; start < texts.size(); start += kBatch) {
        size_t end = std::min(texts.size(), start + kBatch);
        std::vector<std::string> batch(texts.begin() + static_cast<long>(start), texts.begin() + static_cast<long>(end));
        std::vector<std::vector<float>> vecs;
        try {
            vecs = embedder.embed(batch);
        } catch (const std::exception& e) {
            throw Error("embedding batch [" + std::to_string(start) + "," + std::to_string(end) + ") failed: " +
                        e.what());
        }
        for (size_t i = 0; i < vecs.size(); ++i) {
            if (static_cast<int>(vecs[i].size()) != idx.dim)
                throw Error("embedder returned dimension " + std::to_string(vecs[i].size()) + ", expected " +
                            std::to_string(idx.dim));
            double norm = 0.0;
            for (float x : vecs[i]) norm += static_cast<double>(x) * x;
            float inv = norm > 0.0 ? static_cast<float>(1.0 / std::sqrt(norm)) : 0.0f;
            float* dst = idx.data.data() + (start + i) * static_cast<size_t>(idx.dim);
            for (int d = 0; d < idx.dim; ++d) dst[d] = vecs[i][static_cast<size_t>(d)] * inv;
        }
    }
    return idx;
}

struct QaHit {
    int row = -1;
    double score = 0.0;
};

// Exact brute-force cosine top-k; ties break by row index. Corpora in scope
// fit in memory, so approximate structures would change semantics for no win.
inline std::vector<QaHit> qa_search(const QaVectorIndex& idx, const std::string& query, int top_k,
                                    Embedder& embedder) {
    if (top_k < 1) throw ContractError("qa_search: top_k must be >= 1");
    if (idx.rows == 0) return {};
    if (embedder.name() != idx.embedder.name || embedder.dimension() != idx.embedder.dimension)
        throw CompatibilityError("query embedder '" + embedder.name() + "' does not match index embedder '" +
                                 idx.embedder.name + "'");
    std::vector<float> q = embedder.embed_one(query);
    double norm = 0.0;
    for (float x : q) norm += static_cast<double>(x) * x;
    if (norm > 0.0) {
        float inv = static_cast<float>(1.0 / std::sqrt(norm));
        for (float& x : q) x *= inv;
    }
    std::vector<QaHit> hits(static_cast<size_t>(idx.rows));
    for (int r = 0; r < idx.rows; ++r) {
        const float* row = idx.row(r);
        double dot = 0.0;
        for (int d = 0; d < idx.dim; ++d) dot += static_cast<double>(row[d]) * static_cast<double>(q[static_cast<size_t>(d)]);
        hits[static_cast<size_t>(r)] = {r, dot};
    }
    std::sort(hits.begin(), hits.end(), [](const QaHit& a, const QaHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.row < b.row;
    });
    if (static_cast<int>(hits.size()) > top_k) hits.resize(static_cast<size_t>(top_k));
    return hits;
}

// ---------------------------------------------------------------------------
// snapshot: manifest.json + entities.jsonl + postings.jsonl + qa.jsonl +
// vectors.bin (row-major float32, little-endian). Byte layout is documented
// in the README.

inline constexpr const char* kSnapshotFormat = "gsw-index";
inline constexpr int kSnapshotVersion = 1;

inline void snapshot_indices(const EntityIndex& entity_idx, const QaVectorIndex& qa_idx, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::path tmp = fs::path(dir + ".tmp");
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    {
        json manifest = {{"format", kSnapshotFormat},
                         {"version", kSnapshotVersion},
                         {"embedder", {{"name", qa_idx.embedder.name}, {"dimension", qa_idx.embedder.dimension}}},
                         {"k1", entity_idx.k1},
                         {"b", entity_idx.b},
                         {"entity_entries", entity_idx.entries.size()},
                         {"qa_rows", qa_idx.rows},
                         {"vector_dim", qa_idx.dim}};
        std::ofstream out(tmp / "manifest.json", std::ios::binary);
        out << manifest.dump(2) << "\n";
    }
    {
        std::ofstream out(tmp / "entities.jsonl", std::ios::binary);
        for (const auto& e : entity_idx.entries)
            out << json({{"ws", e.ws_doc_id},
                         {"entity", e.entity_id},
                         {"surface", e.surface},
                         {"len", e.length},
                         {"qa", e.attached_rows}})
                       .dump()
                << "\n";
    }
    {
        std::ofstream out(tmp / "postings.jsonl", std::ios::binary);
        for (const auto& [tok, posting] : entity_idx.postings) {
            json p = json::array();
            for (const auto& [entry, tf] : posting) p.push_back({entry, tf});
            out << json({{"t", tok}, {"p", p}}).dump() << "\n";
        }
    }
    {
        std::ofstream out(tmp / "qa.jsonl", std::ios::binary);
        for (const auto& row : qa_idx.pairs) {
            json j = {{"id", row.pair.id},
                      {"question", row.pair.question},
                      {"answer", row.pair.answer_text},
                      {"entities", row.pair.answer_entity_ids},
                      {"verb", row.pair.verb_id},
                      {"doc", row.pair.doc_id},
                      {"annotations", roles_to_json(row.pair.annotations)},
                      {"ws", row.ws_doc_id},
                      {"ws_title", row.ws_title},
                      {"linked", row.linked_entity_ids},
                      {"surfaces", row.answer_entity_surfaces}};
            out << j.dump() << "\n";
        }
    }
    {
        std::ofstream out(tmp / "vectors.bin", std::ios::binary);
        out.write(reinterpret_cast<const char*>(qa_idx.data.data()),
                  static_cast<std::streamsize>(qa_idx.data.size() * sizeof(float)));
        if (!out) throw IoError("failed writing vectors.bin");
    }

    fs::remove_all(dir);
    fs::rename(tmp, dir);
}

inline std::pair<EntityIndex, QaVectorIndex> load_indices(const std::string& dir, const EmbedderInfo& expected) {
    namespace fs = std::filesystem;
    auto read_json = [&](const std::string& name) {
        std::ifstream in(fs::path(dir) / name, std::ios::binary);
        if (!in) throw IoError("snapshot file '" + name + "' missing in '" + dir + "'");
        return in;
    };

    json manifest;
    {
        auto in = read_json("manifest.json");
        in >> manifest;
    }
    if (manifest.value("format", "") != kSnapshotFormat || manifest.value("version", -1) != kSnapshotVersion)
        throw IoError("'" + dir + "' is not a version-" + std::to_string(kSnapshotVersion) + " index snapshot");
    EmbedderInfo stored{manifest.at("embedder").at("name").get<std::string>(),
                        manifest.at("embedder").at("dimension").get<int>()};
    if (!(stored == expected))
        throw CompatibilityError("snapshot built with embedder '" + stored.name + "' (dim " +
                                 std::to_string(stored.dimension) + "), configured '" + expected.name + "' (dim " +
                                 std::to_string(expected.dimension) + ")");

    EntityIndex entity_idx;
    entity_idx.k1 = manifest.at("k1").get<double>();
    entity_idx.b = manifest.at("b").get<double>();
    {
        auto in = read_json("entities.jsonl");
        std::string line;
        long total_len = 0;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            json j = json::parse(line);
            EntityEntry e;
            e.ws_doc_id = j.at("ws").get<std::string>();
            e.entity_id = j.at("entity").get<std::string>();
            e.surface = j.at("surface").get<std::string>();
            e.length = j.at("len").get<int>();
            e.attached_rows = j.at("qa").get<std::vector<int>>();
            total_len += e.length;
            entity_idx.entries.push_back(std::move(e));
        }
        entity_idx.avgdl = entity_idx.entries.empty()
                               ? 0.0
                               : static_cast<double>(total_len) / static_cast<double>(entity_idx.entries.size());
    }
    {
        auto in = read_json("postings.jsonl");
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            json j = json::parse(line);
            std::vector<std::pair<int, int>> posting;
            for (const auto& p : j.at("p")) posting.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
            entity_idx.postings[j.at("t").get<std::string>()] = std::move(posting);
        }
    }

    QaVectorIndex qa_idx;
    qa_idx.embedder = stored;
    qa_idx.dim = manifest.at("vector_dim").get<int>();
    qa_idx.rows = manifest.at("qa_rows").get<int>();
    {
        auto in = read_json("qa.jsonl");
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            json j = json::parse(line);
            IndexedQaPair row;
            row.pair.id = j.at("id").get<std::string>();
            row.pair.question = j.at("question").get<std::string>();
            row.pair.answer_text = j.at("answer").get<std::string>();
            row.pair.answer_entity_ids = j.at("entities").get<std::vector<std::string>>();
            row.pair.verb_id = j.at("verb").get<std::string>();
            row.pair.doc_id = j.at("doc").get<std::string>();
            row.pair.annotations = roles_from_json(j.at("annotations"));
            row.ws_doc_id = j.at("ws").get<std::string>();
            row.ws_title = j.at("ws_title").get<std::string>();
            row.linked_entity_ids = j.at("linked").get<std::vector<std::string>>();
            row.answer_entity_surfaces = j.at("surfaces").get<std::vector<std::string>>();
            qa_idx.pairs.push_back(std::move(row));
        }
    }
    if (static_cast<int>(qa_idx.pairs.size()) != qa_idx.rows)
        throw IoError("qa.jsonl holds " + std::to_string(qa_idx.pairs.size()) + " rows, manifest says " +
                      std::to_string(qa_idx.rows));
    {
        std::ifstream in(fs::path(dir) / "vectors.bin", std::ios::binary);
        if (!in) throw IoError("snapshot file 'vectors.bin' missing in '" + dir + "'");
        size_t expected_floats = static_cast<size_t>(qa_idx.rows) * static_cast<size_t>(qa_idx.dim);
        qa_idx.data.resize(expected_floats);
        in.read(reinterpret_cast<char*>(qa_idx.data.data()),
                static_cast<std::streamsize>(expected_floats * sizeof(float)));
        if (static_cast<size_t>(in.gcount()) != expected_floats * sizeof(float))
            throw IoError("vectors.bin truncated: got " + std::to_string(in.gcount()) + " bytes, expected " +
                          std::to_string(expected_floats * sizeof(float)));
    }
    return {std::move(entity_idx), std::move(qa_idx)};
}

}  // namespace gsw
