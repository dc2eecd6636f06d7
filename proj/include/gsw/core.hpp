#pragma once

// Core data model for generative semantic workspaces: per-document networks
// of entity nodes (with role/state annotations), verb-phrase event nodes, and
// question-answer pairs anchored to verb phrases. Also the line-delimited
// workspace store shared by every other module.
//
// Workspaces and corpora are immutable after construction: nothing here
// mutates a stored value, new values are built instead.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace gsw {

using json = nlohmann::json;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct CompatibilityError : Error {
    using Error::Error;
};
struct ContractError : Error {
    using Error::Error;
};
struct PlanningError : Error {
    using Error::Error;
};
struct ExtractionError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// small string helpers used across modules

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::string to_lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// Lowercase + whitespace collapse. This is the answer-equality normalization
// used by beam pruning; the eval metrics use the stricter normalize_answer.
inline std::string normalize_light(const std::string& s) {
    std::string out;
    bool pending_space = false;
    for (char ch : s) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

inline uint64_t fnv1a64(std::string_view text, uint64_t seed = 1469598103934665603ULL) {
    uint64_t h = seed;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string fnv1a64_hex(std::string_view text) {
    static const char* digits = "0123456789abcdef";
    uint64_t h = fnv1a64(text);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

inline std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---------------------------------------------------------------------------
// workspace model

struct RoleAnnotation {
    std::string role;
    std::vector<std::string> states;

    bool operator==(const RoleAnnotation&) const = default;
};

struct EntityNode {
    std::string id;
    std::string surface;
    std::vector<RoleAnnotation> roles;

    bool operator==(const EntityNode&) const = default;
};

struct VerbPhraseNode {
    std::string id;
    std::string phrase;
    std::vector<std::string> participant_ids;

    bool operator==(const VerbPhraseNode&) const = default;
};

struct QaPair {
    std::string id;
    std::string question;
    std::string answer_text;
    std::vector<std::string> answer_entity_ids;
    std::string verb_id;
    std::string doc_id;
    // role/state annotations copied from the answer entities at build time
    std::vector<RoleAnnotation> annotations;

    bool operator==(const QaPair&) const = default;
};

struct Provenance {
    std::string model;
    int pass_count = 1;
    std::string created_at;

    bool operator==(const Provenance&) const = default;
};

struct Workspace {
    std::string doc_id;
    std::string title;
    std::vector<EntityNode> entities;
    std::vector<VerbPhraseNode> verbs;
    std::vector<QaPair> qa_pairs;
    Provenance provenance;

    bool operator==(const Workspace&) const = default;

    const EntityNode* find_entity(const std::string& id) const {
        for (const auto& e : entities)
            if (e.id == id) return &e;
        return nullptr;
    }
    const VerbPhraseNode* find_verb(const std::string& id) const {
        for (const auto& v : verbs)
            if (v.id == id) return &v;
        return nullptr;
    }
};

struct Document {
    std::string doc_id;
    std::string title;
    std::string text;

    bool operator==(const Document&) const = default;
};

struct Corpus {
    std::vector<Document> documents;
    std::map<std::string, Workspace> workspaces;  // doc_id -> workspace

    const Document* find_document(const std::string& doc_id) const {
        for (const auto& d : documents)
            if (d.doc_id == doc_id) return &d;
        return nullptr;
    }
};

// ---------------------------------------------------------------------------
// validation

struct Violation {
    std::string code;     // stable machine-readable code
    std::string subject;  // offending id
    std::string detail;

    bool operator==(const Violation&) const = default;
};

// Checks every structural invariant of one workspace. Violations are data,
// not errors; an empty result means the workspace is well formed.
inline std::vector<Violation> validate_workspace(const Workspace& ws) {
    std::vector<Violation> out;
    auto flag = [&](std::string code, std::string subject, std::string detail) {
        out.push_back({std::move(code), std::move(subject), std::move(detail)});
    };

    std::map<std::string, int> entity_ids;
    for (const auto& e : ws.entities) {
        if (++entity_ids[e.id] == 2) flag("duplicate-id", e.id, "entity id repeats");
        if (trim(e.surface).empty()) flag("empty-surface", e.id, "entity surface blank");
        std::map<std::string, int> roles;
        for (const auto& r : e.roles)
            if (++roles[r.role] == 2) flag("duplicate-role", e.id, "role '" + r.role + "' repeats");
    }

    std::map<std::string, int> verb_ids;
    for (const auto& v : ws.verbs) {
        if (++verb_ids[v.id] == 2) flag("duplicate-id", v.id, "verb id repeats");
        if (trim(v.phrase).empty()) flag("empty-phrase", v.id, "verb phrase blank");
        for (const auto& p : v.participant_ids)
            if (!entity_ids.count(p)) flag("dangling-participant", v.id, "participant '" + p + "' unresolved");
    }

    std::map<std::string, int> qa_ids;
    for (const auto& q : ws.qa_pairs) {
        if (++qa_ids[q.id] == 2) flag("duplicate-id", q.id, "qa id repeats");
        if (trim(q.question).empty()) flag("empty-question", q.id, "question blank");
        if (trim(q.answer_text).empty()) flag("empty-answer", q.id, "answer blank");
        if (!verb_ids.count(q.verb_id)) flag("dangling-verb", q.id, "verb '" + q.verb_id + "' unresolved");
        for (const auto& e : q.answer_entity_ids)
            if (!entity_ids.count(e)) flag("dangling-answer-entity", q.id, "entity '" + e + "' unresolved");
        if (!q.doc_id.empty() && q.doc_id != ws.doc_id)
            flag("doc-mismatch", q.id, "qa doc '" + q.doc_id + "' differs from workspace '" + ws.doc_id + "'");
    }
    return out;
}

inline std::vector<Violation> validate_corpus(const Corpus& corpus) {
    std::vector<Violation> out;
    std::map<std::string, int> doc_ids;
    for (const auto& d : corpus.documents)
        if (++doc_ids[d.doc_id] == 2) out.push_back({"duplicate-doc", d.doc_id, "document id repeats"});
    for (const auto& [key, ws] : corpus.workspaces) {
        if (key != ws.doc_id)
            out.push_back({"key-mismatch", key, "workspace stored under '" + key + "' but doc_id is '" + ws.doc_id + "'"});
        if (!corpus.documents.empty() && !doc_ids.count(ws.doc_id))
            out.push_back({"unknown-workspace", ws.doc_id, "workspace has no source document"});
        auto vs = validate_workspace(ws);
        out.insert(out.end(), vs.begin(), vs.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON (de)serialization

inline json roles_to_json(const std::vector<RoleAnnotation>& roles) {
    json arr = json::array();
    for (const auto& r : roles) arr.push_back({{"role", r.role}, {"states", r.states}});
    return arr;
}

inline std::vector<RoleAnnotation> roles_from_json(const json& arr) {
    std::vector<RoleAnnotation> out;
    for (const auto& r : arr)
        out.push_back({r.at("role").get<std::string>(), r.at("states").get<std::vector<std::string>>()});
    return out;
}

inline json workspace_to_json(const Workspace& ws) {
    json j;
    j["doc_id"] = ws.doc_id;
    j["title"] = ws.title;
    json ents = json::array();
    for (const auto& e : ws.entities)
        ents.push_back({{"id", e.id}, {"surface", e.surface}, {"roles", roles_to_json(e.roles)}});
    j["entities"] = std::move(ents);
    json verbs = json::array();
    for (const auto& v : ws.verbs)
        verbs.push_back({{"id", v.id}, {"phrase", v.phrase}, {"participants", v.participant_ids}});
    j["verbs"] = std::move(verbs);
    json qas = json::array();
    for (const auto& q : ws.qa_pairs)
        qas.push_back({{"id", q.id},
                       {"question", q.question},
                       {"answer", q.answer_text},
                       {"entities", q.answer_entity_ids},
                       {"verb", q.verb_id},
                       {"doc", q.doc_id},
                       {"annotations", roles_to_json(q.annotations)}});
    j["qa_pairs"] = std::move(qas);
    j["provenance"] = {{"model", ws.provenance.model},
                       {"pass_count", ws.provenance.pass_count},
                       {"created_at", ws.provenance.created_at}};
    return j;
}

inline Workspace workspace_from_json(const json& j) {
    Workspace ws;
    ws.doc_id = j.at("doc_id").get<std::string>();
    ws.title = j.at("title").get<std::string>();
    for (const auto& e : j.at("entities"))
        ws.entities.push_back({e.at("id").get<std::string>(), e.at("surface").get<std::string>(),
                               roles_from_json(e.at("roles"))});
    for (const auto& v : j.at("verbs"))
        ws.verbs.push_back({v.at("id").get<std::string>(), v.at("phrase").get<std::string>(),
                            v.at("participants").get<std::vector<std::string>>()});
    for (const auto& q : j.at("qa_pairs"))
        ws.qa_pairs.push_back({q.at("id").get<std::string>(), q.at("question").get<std::string>(),
                               q.at("answer").get<std::string>(),
                               q.at("entities").get<std::vector<std::string>>(),
                               q.at("verb").get<std::string>(), q.at("doc").get<std::string>(),
                               roles_from_json(q.at("annotations"))});
    const auto& p = j.at("provenance");
    ws.provenance = {p.at("model").get<std::string>(), p.at("pass_count").get<int>(),
                     p.at("created_at").get<std::string>()};
    return ws;
}

// ---------------------------------------------------------------------------
// workspace store: line-delimited, one header object then one workspace per line

inline constexpr const char* kStoreFormat = "gsw-workspaces";
inline constexpr int kStoreVersion = 1;

inline void save_workspaces(const Corpus& corpus, const std::string& path) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp + "' for writing");
        out << json({{"format", kStoreFormat}, {"version", kStoreVersion}}).dump() << "\n";
        for (const auto& [doc_id, ws] : corpus.workspaces) out << workspace_to_json(ws).dump() << "\n";
        if (!out) throw IoError("write failed for '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
}

// Loads a workspace store. Every record is validated; the returned corpus has
// an empty document list (raw texts live in the corpus input file).
inline Corpus load_workspaces(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    Corpus corpus;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw IoError("line " + std::to_string(line_no) + ": malformed record: " + e.what());
        }
        if (line_no == 1) {
            if (!j.contains("format") || j["format"] != kStoreFormat)
                throw IoError("line 1: field 'format': not a workspace store header");
            if (!j.contains("version") || j["version"] != kStoreVersion)
                throw IoError("line 1: field 'version': unsupported store version " + j.value("version", json()).dump() +
                              " (expected " + std::to_string(kStoreVersion) + ")");
            continue;
        }
        Workspace ws;
        try {
            ws = workspace_from_json(j);
        } catch (const json::exception& e) {
            std::string field;
            std::string what = e.what();
            auto pos = what.find("key '");
            if (pos != std::string::npos) {
                auto end = what.find('\'', pos + 5);
                field = what.substr(pos + 5, end - pos - 5);
            }
            throw IoError("line " + std::to_string(line_no) + ": field '" + field + "': " + what);
        }
        auto violations = validate_workspace(ws);
        if (!violations.empty())
            throw IoError("line " + std::to_string(line_no) + ": workspace '" + ws.doc_id +
                          "' invalid: " + violations.front().code + " (" + violations.front().subject + ")");
        if (corpus.workspaces.count(ws.doc_id))
            throw IoError("line " + std::to_string(line_no) + ": duplicate workspace '" + ws.doc_id + "'");
        corpus.workspaces.emplace(ws.doc_id, std::move(ws));
    }
    if (line_no == 0) throw IoError("line 1: missing store header (empty file)");
    return corpus;
}

// Corpus input: line-delimited {doc_id, title, text} records.
inline std::vector<Document> load_corpus_documents(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<Document> docs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            json j = json::parse(line);
            docs.push_back({j.at("doc_id").get<std::string>(), j.value("title", std::string{}),
                            j.at("text").get<std::string>()});
        } catch (const json::exception& e) {
            throw IoError("line " + std::to_string(line_no) + ": malformed document record: " + e.what());
        }
    }
    return docs;
}

inline void save_corpus_documents(const std::vector<Document>& docs, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (const auto& d : docs)
        out << json({{"doc_id", d.doc_id}, {"title", d.title}, {"text", d.text}}).dump() << "\n";
}

}  // namespace gsw
