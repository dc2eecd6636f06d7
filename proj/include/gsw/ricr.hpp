#pragma once

// Chain retrieval over the dual index: a hop resolves one sub-question via
// entity + dense search and cross-encoder reranking; chains accumulate hops
// and carry the geometric mean of their hop scores; B chains survive each hop
// after unique-answer pruning. The engine is stateless across queries.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gsw/core.hpp"
#include "gsw/embedder.hpp"
#include "gsw/indexing.hpp"
#include "gsw/planner.hpp"
#include "gsw/reranker.hpp"

namespace gsw {

enum class ScoringMode { cumulative, similarity, combined, greedy };
enum class SearchMode { dual, entity_only, qa_only };

inline std::string to_string(ScoringMode m) {
    switch (m) {
        case ScoringMode::cumulative: return "cumulative";
        case ScoringMode::similarity: return "similarity";
        case ScoringMode::combined: return "combined";
        case ScoringMode::greedy: return "greedy";
    }
    return "?";
}
inline std::string to_string(SearchMode m) {
    switch (m) {
        case SearchMode::dual: return "dual";
        case SearchMode::entity_only: return "entity_only";
        case SearchMode::qa_only: return "qa_only";
    }
    return "?";
}

inline ScoringMode scoring_mode_from_string(const std::string& s) {
    if (s == "cumulative") return ScoringMode::cumulative;
    if (s == "similarity") return ScoringMode::similarity;
    if (s == "combined") return ScoringMode::combined;
    if (s == "greedy") return ScoringMode::greedy;
    throw ConfigError("unknown scoring mode '" + s + "'");
}
inline SearchMode search_mode_from_string(const std::string& s) {
    if (s == "dual") return SearchMode::dual;
    if (s == "entity_only") return SearchMode::entity_only;
    if (s == "qa_only") return SearchMode::qa_only;
    throw ConfigError("unknown search mode '" + s + "'");
}

struct RicrConfig {
    int beam_width = 5;
    int candidates_k = 15;
    ScoringMode scoring_mode = ScoringMode::cumulative;
    double alpha = 0.5;  // combined-mode interpolation weight on the cumulative term
    SearchMode search_mode = SearchMode::dual;
    bool rerank_enabled = true;
    int entity_top_k = 20;
    int qa_rerank_top_k = 15;
    // off by default: plural answers instantiate the next hop as one joined
    // string; when on, each answer entity branches its own chain
    bool per_entity_branching = false;
    IndexParams index_params;

    void validate() const {
        if (beam_width < 1 || candidates_k < 1 || entity_top_k < 1 || qa_rerank_top_k < 1)
            throw ConfigError("ricr: beam_width/candidates_k/entity_top_k/qa_rerank_top_k must be >= 1");
        if (alpha < 0.0 || alpha > 1.0) throw ConfigError("ricr: alpha must lie in [0,1]");
    }
};

struct HopStep {
    std::string question_asked;
    int row = -1;  // dense-index row of the retrieved pair
    double score = 0.0;
};

struct Chain {
    std::vector<HopStep> hops;
    double raw_product = 1.0;
    double cumulative_score = 0.0;  // (prod hop scores)^(1/t)
    std::string current_answer;     // last hop's answer_text
    std::string branch_answer;      // binding used to instantiate the next hop
    std::string answer_key;         // normalized unique-answer key
    std::map<int, std::vector<std::string>> entity_map;  // hop index -> answer entity texts
    bool terminated = false;
};

struct ChainScoreContext {
    const QaVectorIndex* index = nullptr;
    Embedder* embedder = nullptr;
    std::vector<float> query_embedding;  // unit-normalized embedding of the original query
};

inline std::string linearize_chain(const Chain& chain, const QaVectorIndex& idx, const IndexParams& params) {
    std::vector<std::string> parts;
    for (const auto& hop : chain.hops) parts.push_back(render_qa_text(idx.pairs[static_cast<size_t>(hop.row)].pair, params));
    return join(parts, "\n");
}

// Mode-dependent chain value. cumulative is Eq.-style geometric-mean scoring;
// greedy ranks by the most recent hop only; similarity compares the original
// query against the linearized chain; combined interpolates with alpha.
inline double score_chain(const Chain& chain, ScoringMode mode, double alpha, const ChainScoreContext& ctx,
                          const IndexParams& params = {}) {
    if (chain.hops.empty()) throw ContractError("score_chain: chain is empty");
    switch (mode) {
        case ScoringMode::cumulative:
            return chain.cumulative_score;
        case ScoringMode::greedy:
            return chain.hops.back().score;
        case ScoringMode::similarity:
        case ScoringMode::combined: {
            if (!ctx.embedder || !ctx.index || ctx.query_embedding.empty())
                throw ConfigError("similarity scoring needs an embedder and a query embedding");
            std::vector<float> v = ctx.embedder->embed_one(linearize_chain(chain, *ctx.index, params));
            double norm = 0.0, dot = 0.0;
            for (float x : v) norm += static_cast<double>(x) * x;
            double inv = norm > 0.0 ? 1.0 / std::sqrt(norm) : 0.0;
            for (size_t i = 0; i < v.size() && i < ctx.query_embedding.size(); ++i)
                dot += static_cast<double>(v[i]) * static_cast<double>(ctx.query_embedding[i]);
            double sim = dot * inv;
            if (mode == ScoringMode::similarity) return sim;
            return alpha * chain.cumulative_score + (1.0 - alpha) * sim;
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// hop subroutine

struct RetrievalDebug {
    std::vector<EntityHit> entity_hits;
    std::vector<QaHit> dense_hits;
    std::vector<int> pool;  // deduplicated rows in original retrieval order
};

// Resolves one sub-question: dual search (entity entry points -> attached QA
// pairs, plus direct dense hits), merge, rerank against the question, top-k.
// With reranking disabled the candidates keep the original retrieval order
// and take rank-derived scores 1/(1+position).
inline std::vector<QaHit> retrieve_and_score(const std::string& question, const EntityIndex& entity_idx,
                                             const QaVectorIndex& qa_idx, Embedder* embedder, Reranker* reranker,
                                             const RicrConfig& cfg, RetrievalDebug* debug = nullptr) {
    if (trim(question).empty()) throw ContractError("retrieve_and_score: question is empty");
    cfg.validate();

    std::vector<int> pool;
    std::set<int> seen;
    auto add = [&](int row) {
        if (seen.insert(row).second) pool.push_back(row);
    };

    if (cfg.search_mode != SearchMode::entity_only) {
        if (!embedder) throw ConfigError("dense search needs an embedder");
        auto dense = qa_search(qa_idx, question, cfg.qa_rerank_top_k, *embedder);
        if (debug) debug->dense_hits = dense;
        for (const auto& hit : dense) add(hit.row);
    }
    if (cfg.search_mode != SearchMode::qa_only) {
        auto hits = entity_search(entity_idx, question, cfg.entity_top_k);
        if (debug) debug->entity_hits = hits;
        for (const auto& hit : hits) {
            const auto& entry = entity_idx.entries[static_cast<size_t>(hit.entry)];
            for (int row : entry.attached_rows) add(row);
        }
    }
    if (debug) debug->pool = pool;
    if (pool.empty()) return {};

    std::vector<QaHit> scored;
    scored.reserve(pool.size());
    if (cfg.rerank_enabled) {
        if (!reranker) throw ConfigError("reranking enabled but no reranker configured");
        std::vector<std::string> texts;
        texts.reserve(pool.size());
        for (int row : pool) texts.push_back(render_qa_text(qa_idx.pairs[static_cast<size_t>(row)].pair, cfg.index_params));
        auto raw = reranker->score(question, texts);
        if (raw.size() != pool.size()) throw Error("reranker returned " + std::to_string(raw.size()) + " scores for " +
                                                   std::to_string(pool.size()) + " candidates");
        for (size_t i = 0; i < pool.size(); ++i) scored.push_back({pool[i], clamp_score(raw[i])});
        std::sort(scored.begin(), scored.end(), [&](const QaHit& a, const QaHit& b) {
            if (a.score != b.score) return a.score > b.score;
            const auto& pa = qa_idx.pairs[static_cast<size_t>(a.row)].pair.id;
            const auto& pb = qa_idx.pairs[static_cast<size_t>(b.row)].pair.id;
            if (pa != pb) return pa < pb;
            return a.row < b.row;
        });
    } else {
        for (size_t i = 0; i < pool.size(); ++i)
            scored.push_back({pool[i], clamp_score(1.0 / (1.0 + static_cast<double>(i)))});
    }
    if (static_cast<int>(scored.size()) > cfg.candidates_k) scored.resize(static_cast<size_t>(cfg.candidates_k));
    return scored;
}

// ---------------------------------------------------------------------------
// beam construction

namespace detail {

inline std::vector<Chain> extend_chain(const Chain& base, const std::string& question, const QaHit& cand,
                                       const QaVectorIndex& idx, bool per_entity_branching) {
    const auto& row = idx.pairs[static_cast<size_t>(cand.row)];
    int hop_index = static_cast<int>(base.hops.size());

    std::vector<std::string> surfaces = row.answer_entity_surfaces;
    if (surfaces.empty()) surfaces.push_back(row.pair.answer_text);

    auto make = [&](const std::string& branch, std::vector<std::string> map_entry) {
        Chain c = base;
        c.hops.push_back({question, cand.row, cand.score});
        c.raw_product = base.raw_product * cand.score;
        c.cumulative_score = std::pow(c.raw_product, 1.0 / static_cast<double>(c.hops.size()));
        c.current_answer = row.pair.answer_text;
        c.branch_answer = branch;
        c.answer_key = normalize_light(branch);
        c.entity_map[hop_index] = std::move(map_entry);
        return c;
    };

    if (!per_entity_branching) return {make(row.pair.answer_text, surfaces)};
    std::vector<Chain> out;
    for (const auto& surface : surfaces) out.push_back(make(surface, {surface}));
    return out;
}

}  // namespace detail

// Extends every active chain with its retrieved candidates and merges the
// results into one tentative long-list (at most k x B entries). Non-final
// hops group candidates by unique answer, keeping the best pair per answer;
// the final hop uses all pairs directly. Chains whose retrieval came back
// empty are marked terminated with frozen scores and handed back separately.
inline std::vector<Chain> expand_beams(const std::vector<Chain>& chains, const std::vector<std::string>& questions,
                                       const std::vector<std::vector<QaHit>>& candidates, const QaVectorIndex& idx,
                                       bool final_hop, const RicrConfig& cfg, std::vector<Chain>* terminated) {
    if (chains.size() != questions.size() || chains.size() != candidates.size())
        throw ContractError("expand_beams: chains/questions/candidates size mismatch");

    std::vector<Chain> tentative;
    for (size_t i = 0; i < chains.size(); ++i) {
        if (candidates[i].empty()) {
            if (!chains[i].hops.empty() && terminated) {
                Chain dead = chains[i];
                dead.terminated = true;
                terminated->push_back(std::move(dead));
            }
            continue;
        }
        for (const auto& cand : candidates[i]) {
            auto extended = detail::extend_chain(chains[i], questions[i], cand, idx, cfg.per_entity_branching);
            for (auto& c : extended) tentative.push_back(std::move(c));
        }
    }

    if (!final_hop) {
        std::map<std::string, size_t> best;  // answer key -> index into grouped
        std::vector<Chain> grouped;
        for (auto& c : tentative) {
            auto it = best.find(c.answer_key);
            if (it == best.end()) {
                best[c.answer_key] = grouped.size();
                grouped.push_back(std::move(c));
            } else {
                Chain& cur = grouped[it->second];
                if (c.raw_product > cur.raw_product ||
                    (c.raw_product == cur.raw_product &&
                     idx.pairs[static_cast<size_t>(c.hops.back().row)].pair.id <
                         idx.pairs[static_cast<size_t>(cur.hops.back().row)].pair.id))
                    cur = std::move(c);
            }
        }
        return grouped;
    }
    return tentative;
}

// Top-B by the configured chain score, one chain per unique normalized
// answer. Ordering: score desc, last hop score desc, last pair id asc.
inline std::vector<Chain> prune_beams(std::vector<Chain> tentative, const RicrConfig& cfg,
                                      const ChainScoreContext& ctx) {
    struct Ranked {
        double value;
        size_t index;
    };
    std::vector<Ranked> ranked;
    ranked.reserve(tentative.size());
    for (size_t i = 0; i < tentative.size(); ++i)
        ranked.push_back({score_chain(tentative[i], cfg.scoring_mode, cfg.alpha, ctx, cfg.index_params), i});

    auto last_id = [&](size_t i) -> const std::string& {
        return ctx.index->pairs[static_cast<size_t>(tentative[i].hops.back().row)].pair.id;
    };
    std::stable_sort(ranked.begin(), ranked.end(), [&](const Ranked& a, const Ranked& b) {
        if (a.value != b.value) return a.value > b.value;
        double la = tentative[a.index].hops.back().score;
        double lb = tentative[b.index].hops.back().score;
        if (la != lb) return la > lb;
        if (last_id(a.index) != last_id(b.index)) return last_id(a.index) < last_id(b.index);
        return tentative[a.index].hops.back().row < tentative[b.index].hops.back().row;
    });

    std::vector<Chain> kept;
    std::set<std::string> seen_answers;
    for (const auto& r : ranked) {
        if (static_cast<int>(kept.size()) >= cfg.beam_width) break;
        if (!seen_answers.insert(tentative[r.index].answer_key).second) continue;
        kept.push_back(tentative[r.index]);
    }
    return kept;
}

// ---------------------------------------------------------------------------
// full procedure

struct RicrResult {
    std::vector<int> evidence_rows;   // deduplicated, chain-rank then hop order
    std::vector<Chain> final_chains;  // survivors plus terminated chains, all sequences
    bool exhausted = false;           // some sequence lost every chain before its last hop
    json trace;
};

namespace detail {

inline json beams_to_trace(const std::vector<Chain>& tentative, const std::vector<Chain>& kept,
                           const std::vector<Chain>& terminated_here, ScoringMode mode, double alpha,
                           const ChainScoreContext& ctx, const IndexParams& params) {
    auto key_of = [](const Chain& c) {
        std::string k;
        for (const auto& h : c.hops) k += std::to_string(h.row) + "/";
        k += c.answer_key;
        return k;
    };
    std::set<std::string> kept_keys;
    for (const auto& c : kept) kept_keys.insert(key_of(c));

    auto row_json = [&](const Chain& c, const std::string& status, int rank) {
        json em = json::object();
        for (const auto& [hop, entities] : c.entity_map) em[std::to_string(hop)] = entities;
        return json{{"rank", rank},
                    {"chain_score", score_chain(c, mode, alpha, ctx, params)},
                    {"cumulative", c.cumulative_score},
                    {"last_hop", c.hops.back().score},
                    {"status", status},
                    {"answer", c.current_answer},
                    {"entity_map", em}};
    };

    json beams = json::array();
    int rank = 0;
    for (const auto& c : kept) beams.push_back(row_json(c, "kept", ++rank));
    int pruned_listed = 0;
    std::vector<std::pair<double, const Chain*>> rest;
    for (const auto& c : tentative)
        if (!kept_keys.count(key_of(c))) rest.push_back({score_chain(c, mode, alpha, ctx, params), &c});
    std::stable_sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [value, c] : rest) {
        if (++pruned_listed > 10) break;  // keep traces readable on large pools
        beams.push_back(row_json(*c, "pruned", ++rank));
    }
    for (const auto& c : terminated_here) beams.push_back(row_json(c, "terminated", ++rank));
    return beams;
}

inline json retrieval_to_trace(const std::string& question, const RetrievalDebug& debug,
                               const std::vector<QaHit>& reranked, const EntityIndex& entity_idx,
                               const QaVectorIndex& qa_idx) {
    json entity_table = json::array();
    int rank = 0;
    for (const auto& hit : debug.entity_hits) {
        const auto& e = entity_idx.entries[static_cast<size_t>(hit.entry)];
        entity_table.push_back(
            {{"rank", ++rank}, {"entity", e.surface}, {"workspace", e.ws_doc_id}, {"score", hit.score}});
    }
    json qa_table = json::array();
    rank = 0;
    for (const auto& hit : reranked) {
        const auto& row = qa_idx.pairs[static_cast<size_t>(hit.row)];
        qa_table.push_back({{"rank", ++rank},
                            {"question", row.pair.question},
                            {"answer", row.pair.answer_text},
                            {"source", row.ws_title.empty() ? row.ws_doc_id : row.ws_title},
                            {"score", hit.score}});
    }
    return {{"question", question}, {"entity_table", entity_table}, {"qa_table", qa_table}};
}

}  // namespace detail

inline RicrResult run_ricr(const DecompositionPlan& plan, const EntityIndex& entity_idx, const QaVectorIndex& qa_idx,
                           Embedder* embedder, Reranker* reranker, const RicrConfig& cfg) {
    cfg.validate();
    {
        auto violations = validate_plan(plan);
        if (!violations.empty())
            throw ContractError("run_ricr: plan invalid: " + violations.front().code + " at " +
                                violations.front().subject);
    }

    ChainScoreContext ctx;
    ctx.index = &qa_idx;
    ctx.embedder = embedder;
    if ((cfg.scoring_mode == ScoringMode::similarity || cfg.scoring_mode == ScoringMode::combined)) {
        if (!embedder) throw ConfigError("similarity/combined scoring needs an embedder");
        ctx.query_embedding = embedder->embed_one(plan.original_query);
        double norm = 0.0;
        for (float x : ctx.query_embedding) norm += static_cast<double>(x) * x;
        if (norm > 0.0) {
            float inv = static_cast<float>(1.0 / std::sqrt(norm));
            for (float& x : ctx.query_embedding) x *= inv;
        }
    }

    RicrResult result;
    result.trace = {{"format", "gsw-trace"},
                    {"version", 1},
                    {"query", plan.original_query},
                    {"plan", plan_to_json(plan)},
                    {"config",
                     {{"beam_width", cfg.beam_width},
                      {"candidates_k", cfg.candidates_k},
                      {"scoring", to_string(cfg.scoring_mode)},
                      {"alpha", cfg.alpha},
                      {"search", to_string(cfg.search_mode)},
                      {"rerank", cfg.rerank_enabled},
                      {"entity_top_k", cfg.entity_top_k},
                      {"qa_rerank_top_k", cfg.qa_rerank_top_k}}},
                    {"sequences", json::array()}};

    std::vector<Chain> all_evidence_chains;

    for (size_t s = 0; s < plan.sequences.size(); ++s) {
        const auto& seq = plan.sequences[s];
        int total_hops = static_cast<int>(seq.size());
        json seq_trace = {{"index", s + 1}, {"exhausted", false}, {"hops", json::array()}};

        std::vector<Chain> chains{Chain{}};  // root: empty chain, product 1
        std::vector<Chain> terminated;

        for (int t = 0; t < total_hops; ++t) {
            bool final_hop = (t == total_hops - 1);
            std::vector<std::string> questions;
            std::vector<std::vector<QaHit>> candidates;
            json retrievals = json::array();

            for (const auto& chain : chains) {
                std::string question;
                if (t == 0) {
                    question = seq[static_cast<size_t>(t)].text;
                } else {
                    question = instantiate(seq[static_cast<size_t>(t)], chain.branch_answer);
                }
                RetrievalDebug debug;
                auto cands = retrieve_and_score(question, entity_idx, qa_idx, embedder, reranker, cfg, &debug);
                retrievals.push_back(detail::retrieval_to_trace(question, debug, cands, entity_idx, qa_idx));
                questions.push_back(std::move(question));
                candidates.push_back(std::move(cands));
            }

            std::vector<Chain> terminated_here;
            auto tentative = expand_beams(chains, questions, candidates, qa_idx, final_hop, cfg, &terminated_here);
            auto kept = prune_beams(tentative, cfg, ctx);

            json hop_trace = {{"hop", t + 1},
                              {"total_hops", total_hops},
                              {"sub_question", seq[static_cast<size_t>(t)].text},
                              {"grouped", !final_hop},
                              {"candidates", tentative.size()},
                              {"retrievals", retrievals},
                              {"beams", detail::beams_to_trace(tentative, kept, terminated_here, cfg.scoring_mode,
                                                               cfg.alpha, ctx, cfg.index_params)}};
            seq_trace["hops"].push_back(std::move(hop_trace));

            for (auto& dead : terminated_here) terminated.push_back(std::move(dead));
            chains = std::move(kept);
            if (chains.empty()) {
                seq_trace["exhausted"] = true;
                result.exhausted = true;
                break;
            }
        }

        // survivors first (already in beam order), then early-terminated
        // chains by their frozen score
        std::sort(terminated.begin(), terminated.end(),
                  [](const Chain& a, const Chain& b) { return a.cumulative_score > b.cumulative_score; });
        for (const auto& c : chains) all_evidence_chains.push_back(c);
        for (const auto& c : terminated) all_evidence_chains.push_back(c);
        result.trace["sequences"].push_back(std::move(seq_trace));
    }

    std::set<std::string> seen_pair_ids;
    json evidence_trace = json::array();
    for (const auto& chain : all_evidence_chains) {
        for (const auto& hop : chain.hops) {
            const auto& row = qa_idx.pairs[static_cast<size_t>(hop.row)];
            std::string key = row.ws_doc_id + "\x1f" + row.pair.id;
            if (!seen_pair_ids.insert(key).second) continue;
            result.evidence_rows.push_back(hop.row);
            evidence_trace.push_back({{"question", row.pair.question},
                                      {"answer", row.pair.answer_text},
                                      {"source", row.ws_title.empty() ? row.ws_doc_id : row.ws_title},
                                      {"annotations", roles_to_json(row.pair.annotations)}});
        }
    }
    result.final_chains = std::move(all_evidence_chains);
    result.trace["final_evidence"] = std::move(evidence_trace);
    return result;
}

// ---------------------------------------------------------------------------
// trace rendering for the CLI

inline std::string render_trace_text(const json& trace) {
    std::ostringstream out;
    out << "Query: " << trace.value("query", "") << "\n";
    const auto& cfg = trace.at("config");
    out << "Config: beam_width=" << cfg.value("beam_width", 0) << " candidates_k=" << cfg.value("candidates_k", 0)
        << " scoring=" << cfg.value("scoring", "") << " search=" << cfg.value("search", "")
        << " rerank=" << (cfg.value("rerank", true) ? "on" : "off") << "\n";

    const auto& plan = trace.at("plan");
    out << "Plan:\n";
    int seq_no = 0;
    for (const auto& seq : plan.at("sequences")) {
        ++seq_no;
        out << "  sequence " << seq_no << ":\n";
        int q = 0;
        for (const auto& step : seq) out << "    Q" << ++q << ": " << step.value("question", "") << "\n";
    }

    for (const auto& seq : trace.at("sequences")) {
        for (const auto& hop : seq.at("hops")) {
            out << "\nHop " << hop.value("hop", 0) << "/" << hop.value("total_hops", 0) << " (sequence "
                << seq.value("index", 0) << "): " << hop.value("sub_question", "") << "\n";
            for (const auto& retrieval : hop.at("retrievals")) {
                out << "  question: " << retrieval.value("question", "") << "\n";
                const auto& qa_table = retrieval.at("qa_table");
                for (size_t i = 0; i < qa_table.size() && i < 5; ++i) {
                    const auto& row = qa_table[i];
                    char buf[32];
                    std::snprintf(buf, sizeof(buf), "%.4f", row.value("score", 0.0));
                    out << "    " << row.value("rank", 0) << ". [" << buf << "] " << row.value("question", "")
                        << " -> " << row.value("answer", "") << " (" << row.value("source", "") << ")\n";
                }
            }
            out << "  beams (candidates=" << hop.value("candidates", 0) << "):\n";
            for (const auto& beam : hop.at("beams")) {
                char c1[32], c2[32];
                std::snprintf(c1, sizeof(c1), "%.4f", beam.value("chain_score", 0.0));
                std::snprintf(c2, sizeof(c2), "%.4f", beam.value("last_hop", 0.0));
                out << "    " << beam.value("rank", 0) << ". chain_score=" << c1 << " last_hop=" << c2 << " "
                    << beam.value("status", "") << " answer=" << beam.value("answer", "")
                    << " entity_map=" << beam.at("entity_map").dump() << "\n";
            }
        }
    }

    out << "\nFinal evidence (" << trace.at("final_evidence").size() << " unique QA pairs):\n";
    int n = 0;
    for (const auto& item : trace.at("final_evidence"))
        out << "  " << ++n << ". Q: " << item.value("question", "") << " A: " << item.value("answer", "") << "\n";
    if (trace.contains("answer")) out << "\nAnswer: " << trace.value("answer", "") << "\n";
    return out.str();
}

}  // namespace gsw
