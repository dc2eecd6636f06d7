#pragma once

// Declarative pipeline configuration (one JSON document, env-var
// interpolation for secrets, unknown fields rejected) and the query engine
// that wires planner -> RICR -> answering together.

#include <cstdlib>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "gsw/answering.hpp"
#include "gsw/clients.hpp"
#include "gsw/embedder.hpp"
#include "gsw/evalkit.hpp"
#include "gsw/extraction.hpp"
#include "gsw/http_backends.hpp"
#include "gsw/indexing.hpp"
#include "gsw/planner.hpp"
#include "gsw/prompts.hpp"
#include "gsw/reranker.hpp"
#include "gsw/ricr.hpp"

namespace gsw {

struct RoleConfig {
    std::string backend;  // "stub" | "http" | role-specific offline backends
    std::string model;
    std::string endpoint;
    std::string api_key_env;
};

struct PipelineConfig {
    uint64_t seed = 0;
    // paths
    std::string workspace_store;
    std::string index_snapshot;
    std::string fixtures;  // stub fixture directory (digest -> response files)
    std::string prompt_dir;
    // role wiring
    RoleConfig extraction{"stub", "stub-extractor", "", ""};
    RoleConfig decomposition{"stub", "stub-decomposer", "", ""};
    RoleConfig answering{"overlap", "", "", ""};
    RoleConfig reranking{"overlap", "", "", ""};
    RoleConfig embedding{"hashed", "", "", ""};
    int embedding_dimension = 64;

    ExtractionConfig extraction_cfg;
    RicrConfig ricr;
    bool abstain = true;
    bool decompose = true;
    double ingest_failure_threshold = 0.2;
    int jobs = 1;

    json echo;  // the parsed document, for report reproducibility
};

namespace detail {

inline std::string interpolate_env(const std::string& value) {
    std::string out;
    size_t pos = 0;
    while (pos < value.size()) {
        auto start = value.find("${", pos);
        if (start == std::string::npos) {
            out += value.substr(pos);
            break;
        }
        auto end = value.find('}', start);
        if (end == std::string::npos) throw ConfigError("unterminated ${...} in config value: " + value);
        out += value.substr(pos, start - pos);
        std::string var = value.substr(start + 2, end - start - 2);
        const char* env = std::getenv(var.c_str());
        if (!env) throw ConfigError("environment variable '" + var + "' referenced in config is not set");
        out += env;
        pos = end + 1;
    }
    return out;
}

inline void reject_unknown(const json& j, const std::vector<std::string>& known, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw ConfigError("unknown config field '" + where + it.key() + "'");
    }
}

inline RoleConfig parse_role(const json& j, const std::string& where, const RoleConfig& defaults) {
    reject_unknown(j, {"backend", "model", "endpoint", "api_key_env"}, where);
    RoleConfig r = defaults;
    if (j.contains("backend")) r.backend = j["backend"].get<std::string>();
    if (j.contains("model")) r.model = interpolate_env(j["model"].get<std::string>());
    if (j.contains("endpoint")) r.endpoint = interpolate_env(j["endpoint"].get<std::string>());
    if (j.contains("api_key_env")) r.api_key_env = j["api_key_env"].get<std::string>();
    return r;
}

}  // namespace detail

inline PipelineConfig parse_pipeline_config(const json& j) {
    PipelineConfig cfg;
    cfg.echo = j;
    detail::reject_unknown(j,
                           {"seed", "paths", "extraction", "decomposition", "answering", "reranking", "embedding",
                            "ricr", "index", "abstain", "decompose", "ingest", "jobs"},
                           "");
    if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
    if (j.contains("jobs")) cfg.jobs = j["jobs"].get<int>();
    if (j.contains("abstain")) cfg.abstain = j["abstain"].get<bool>();
    if (j.contains("decompose")) cfg.decompose = j["decompose"].get<bool>();

    if (j.contains("paths")) {
        const auto& p = j["paths"];
        detail::reject_unknown(p, {"workspace_store", "index_snapshot", "fixtures", "prompt_dir"}, "paths.");
        cfg.workspace_store = detail::interpolate_env(p.value("workspace_store", ""));
        cfg.index_snapshot = detail::interpolate_env(p.value("index_snapshot", ""));
        cfg.fixtures = detail::interpolate_env(p.value("fixtures", ""));
        cfg.prompt_dir = detail::interpolate_env(p.value("prompt_dir", ""));
    }
    if (j.contains("extraction")) {
        const auto& e = j["extraction"];
        detail::reject_unknown(e,
                               {"backend", "model", "endpoint", "api_key_env", "two_pass", "temperature",
                                "max_tokens", "prompt_template", "refine_template", "timestamp"},
                               "extraction.");
        json role = json::object();
        for (const char* key : {"backend", "model", "endpoint", "api_key_env"})
            if (e.contains(key)) role[key] = e[key];
        cfg.extraction = detail::parse_role(role, "extraction.", cfg.extraction);
        if (e.contains("two_pass")) cfg.extraction_cfg.two_pass = e["two_pass"].get<bool>();
        if (e.contains("temperature")) cfg.extraction_cfg.temperature = e["temperature"].get<double>();
        if (e.contains("max_tokens")) cfg.extraction_cfg.max_tokens = e["max_tokens"].get<int>();
        if (e.contains("prompt_template")) cfg.extraction_cfg.prompt_template_id = e["prompt_template"].get<std::string>();
        if (e.contains("refine_template")) cfg.extraction_cfg.refine_template_id = e["refine_template"].get<std::string>();
        if (e.contains("timestamp")) cfg.extraction_cfg.timestamp_override = e["timestamp"].get<std::string>();
    }
    if (j.contains("decomposition"))
        cfg.decomposition = detail::parse_role(j["decomposition"], "decomposition.", cfg.decomposition);
    if (j.contains("answering")) cfg.answering = detail::parse_role(j["answering"], "answering.", cfg.answering);
    if (j.contains("reranking")) cfg.reranking = detail::parse_role(j["reranking"], "reranking.", cfg.reranking);
    if (j.contains("embedding")) {
        detail::reject_unknown(j["embedding"], {"backend", "model", "endpoint", "api_key_env", "dimension"},
                               "embedding.");
        const auto& e = j["embedding"];
        if (e.contains("dimension")) cfg.embedding_dimension = e["dimension"].get<int>();
        json role = json::object();
        for (const char* key : {"backend", "model", "endpoint", "api_key_env"})
            if (e.contains(key)) role[key] = e[key];
        cfg.embedding = detail::parse_role(role, "embedding.", cfg.embedding);
    }
    if (j.contains("ricr")) {
        const auto& r = j["ricr"];
        detail::reject_unknown(r,
                               {"beam_width", "candidates_k", "scoring", "alpha", "search", "rerank", "entity_top_k",
                                "qa_rerank_top_k", "per_entity_branching"},
                               "ricr.");
        if (r.contains("beam_width")) cfg.ricr.beam_width = r["beam_width"].get<int>();
        if (r.contains("candidates_k")) cfg.ricr.candidates_k = r["candidates_k"].get<int>();
        if (r.contains("scoring")) cfg.ricr.scoring_mode = scoring_mode_from_string(r["scoring"].get<std::string>());
        if (r.contains("alpha")) cfg.ricr.alpha = r["alpha"].get<double>();
        if (r.contains("search")) cfg.ricr.search_mode = search_mode_from_string(r["search"].get<std::string>());
        if (r.contains("rerank")) cfg.ricr.rerank_enabled = r["rerank"].get<bool>();
        if (r.contains("entity_top_k")) cfg.ricr.entity_top_k = r["entity_top_k"].get<int>();
        if (r.contains("qa_rerank_top_k")) cfg.ricr.qa_rerank_top_k = r["qa_rerank_top_k"].get<int>();
        if (r.contains("per_entity_branching")) cfg.ricr.per_entity_branching = r["per_entity_branching"].get<bool>();
    }
    if (j.contains("index")) {
        const auto& p = j["index"];
        detail::reject_unknown(p, {"k1", "b", "qa_text_template"}, "index.");
        if (p.contains("k1")) cfg.ricr.index_params.k1 = p["k1"].get<double>();
        if (p.contains("b")) cfg.ricr.index_params.b = p["b"].get<double>();
        if (p.contains("qa_text_template"))
            cfg.ricr.index_params.qa_text_template = p["qa_text_template"].get<std::string>();
    }
    if (j.contains("ingest")) {
        detail::reject_unknown(j["ingest"], {"failure_threshold"}, "ingest.");
        if (j["ingest"].contains("failure_threshold"))
            cfg.ingest_failure_threshold = j["ingest"]["failure_threshold"].get<double>();
    }
    cfg.ricr.validate();
    return cfg;
}

inline PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_pipeline_config(j);
}

// ---------------------------------------------------------------------------
// runtime assembly

struct RuntimeBundle {
    PromptStore prompts = PromptStore::defaults();
    std::unique_ptr<ModelClient> extractor;
    std::unique_ptr<ModelClient> decomposer;
    std::unique_ptr<ModelClient> answerer;
    std::unique_ptr<Reranker> reranker;
    std::unique_ptr<Embedder> embedder;
};

namespace detail {

inline std::string api_key_for(const RoleConfig& role) {
    if (role.api_key_env.empty()) return "";
    const char* env = std::getenv(role.api_key_env.c_str());
    if (!env) throw ConfigError("api key env '" + role.api_key_env + "' is not set");
    return env;
}

inline std::unique_ptr<ModelClient> build_chat_client(const RoleConfig& role, const std::string& fixtures,
                                                      const std::string& which) {
    if (role.backend == "stub") {
        auto stub = std::make_unique<StubModelClient>(role.model.empty() ? ("stub-" + which) : role.model);
        if (!fixtures.empty()) stub->set_fixture_dir(fixtures);
        return stub;
    }
    if (role.backend == "http") {
        if (role.endpoint.empty() || role.model.empty())
            throw ConfigError(which + ": http backend needs endpoint and model");
        return std::make_unique<HttpChatClient>(role.endpoint, role.model, api_key_for(role));
    }
    if (role.backend == "overlap" && which == "answering") return std::make_unique<OverlapAnswerClient>();
    throw ConfigError(which + ": unknown backend '" + role.backend + "'");
}

}  // namespace detail

inline RuntimeBundle build_runtime(const PipelineConfig& cfg) {
    RuntimeBundle rt;
    if (!cfg.prompt_dir.empty()) rt.prompts.load_dir(cfg.prompt_dir);
    rt.prompts.require(cfg.extraction_cfg.prompt_template_id);
    rt.prompts.require(cfg.extraction_cfg.refine_template_id);

    rt.extractor = detail::build_chat_client(cfg.extraction, cfg.fixtures, "extraction");
    rt.decomposer = detail::build_chat_client(cfg.decomposition, cfg.fixtures, "decomposition");
    rt.answerer = detail::build_chat_client(cfg.answering, cfg.fixtures, "answering");

    if (cfg.reranking.backend == "overlap") {
        rt.reranker = std::make_unique<TokenOverlapReranker>();
    } else if (cfg.reranking.backend == "http") {
        if (cfg.reranking.endpoint.empty() || cfg.reranking.model.empty())
            throw ConfigError("reranking: http backend needs endpoint and model");
        rt.reranker = std::make_unique<HttpReranker>(cfg.reranking.endpoint, cfg.reranking.model,
                                                     detail::api_key_for(cfg.reranking));
    } else {
        throw ConfigError("reranking: unknown backend '" + cfg.reranking.backend + "'");
    }

    if (cfg.embedding.backend == "hashed") {
        rt.embedder = std::make_unique<HashedEmbedder>(cfg.embedding_dimension);
    } else if (cfg.embedding.backend == "http") {
        if (cfg.embedding.endpoint.empty() || cfg.embedding.model.empty())
            throw ConfigError("embedding: http backend needs endpoint and model");
        rt.embedder = std::make_unique<HttpEmbedder>(cfg.embedding.endpoint, cfg.embedding.model,
                                                     cfg.embedding_dimension, detail::api_key_for(cfg.embedding));
    } else {
        throw ConfigError("embedding: unknown backend '" + cfg.embedding.backend + "'");
    }
    return rt;
}

// ---------------------------------------------------------------------------
// the per-query pipeline: plan once, run RICR, answer from QA evidence

struct QueryEngine {
    const EntityIndex* entity_index = nullptr;
    const QaVectorIndex* qa_index = nullptr;
    Embedder* embedder = nullptr;
    Reranker* reranker = nullptr;
    ModelClient* decomposer = nullptr;  // null -> fallback plan
    ModelClient* answerer = nullptr;
    const PromptStore* prompts = nullptr;
    RicrConfig ricr;
    bool abstain_enabled = true;
    bool decompose_enabled = true;
    bool fallback_on_plan_error = true;

    struct Outcome {
        DecompositionPlan plan;
        RicrResult retrieval;
        AnswerResult answer;
    };

    Outcome run(const std::string& query) const {
        if (!entity_index || !qa_index || !answerer || !prompts)
            throw ConfigError("query engine is missing indices, an answer client, or prompts");

        Outcome outcome;
        if (decompose_enabled && decomposer) {
            try {
                outcome.plan = decompose(query, *decomposer, *prompts);
            } catch (const PlanningError&) {
                if (!fallback_on_plan_error) throw;
                outcome.plan = fallback_plan(query);
            }
        } else {
            outcome.plan = fallback_plan(query);
        }

        outcome.retrieval = run_ricr(outcome.plan, *entity_index, *qa_index, embedder, reranker, ricr);

        AnswerRequest req;
        req.query = query;
        req.abstain_enabled = abstain_enabled;
        for (int row : outcome.retrieval.evidence_rows)
            req.evidence.push_back(qa_index->pairs[static_cast<size_t>(row)].pair);
        outcome.answer = answer(req, *answerer, *prompts);
        outcome.retrieval.trace["answer"] = outcome.answer.extracted_answer;
        outcome.retrieval.trace["context_tokens"] = outcome.answer.prompt_tokens;
        return outcome;
    }

    QueryFn as_query_fn() const {
        return [this](const std::string& question) {
            Outcome outcome = run(question);
            QueryOutcome q;
            q.answer = outcome.answer;
            q.evidence_count = static_cast<int>(outcome.retrieval.evidence_rows.size());
            q.trace = std::move(outcome.retrieval.trace);
            return q;
        };
    }
};

// ---------------------------------------------------------------------------
// ablation sweeps: evaluate the same dataset under engine variations

struct SweepPoint {
    std::string value;
    EvalAggregates aggregates;
};

using EngineMutator = std::function<void(QueryEngine&)>;

inline std::vector<SweepPoint> run_engine_sweep(const std::vector<QuestionRecord>& dataset, const QueryEngine& base,
                                                const std::vector<std::pair<std::string, EngineMutator>>& variants,
                                                int jobs = 1) {
    std::vector<SweepPoint> out;
    for (const auto& [label, mutate] : variants) {
        QueryEngine engine = base;
        mutate(engine);
        EvalReport report = run_eval(dataset, engine.as_query_fn(), {{"variant", label}}, jobs);
        out.push_back({label, report.aggregates});
    }
    return out;
}

inline std::vector<SweepPoint> sweep_scoring(const std::vector<QuestionRecord>& dataset, const QueryEngine& base,
                                             const std::vector<ScoringMode>& modes, int jobs = 1) {
    std::vector<std::pair<std::string, EngineMutator>> variants;
    for (ScoringMode mode : modes)
        variants.push_back({to_string(mode), [mode](QueryEngine& e) { e.ricr.scoring_mode = mode; }});
    return run_engine_sweep(dataset, base, variants, jobs);
}

inline std::vector<SweepPoint> sweep_beam_width(const std::vector<QuestionRecord>& dataset, const QueryEngine& base,
                                                const std::vector<int>& widths, int jobs = 1) {
    std::vector<std::pair<std::string, EngineMutator>> variants;
    for (int width : widths)
        variants.push_back({std::to_string(width), [width](QueryEngine& e) { e.ricr.beam_width = width; }});
    return run_engine_sweep(dataset, base, variants, jobs);
}

inline std::vector<SweepPoint> sweep_search_mode(const std::vector<QuestionRecord>& dataset, const QueryEngine& base,
                                                 int jobs = 1) {
    std::vector<std::pair<std::string, EngineMutator>> variants;
    for (SearchMode mode : {SearchMode::dual, SearchMode::entity_only, SearchMode::qa_only})
        variants.push_back({to_string(mode), [mode](QueryEngine& e) { e.ricr.search_mode = mode; }});
    return run_engine_sweep(dataset, base, variants, jobs);
}

inline std::vector<SweepPoint> sweep_rerank(const std::vector<QuestionRecord>& dataset, const QueryEngine& base,
                                            int jobs = 1) {
    return run_engine_sweep(dataset, base,
                            {{"rerank", [](QueryEngine& e) { e.ricr.rerank_enabled = true; }},
                             {"no-rerank", [](QueryEngine& e) { e.ricr.rerank_enabled = false; }}},
                            jobs);
}

inline std::vector<SweepPoint> sweep_decompose(const std::vector<QuestionRecord>& dataset, const QueryEngine& base,
                                               int jobs = 1) {
    return run_engine_sweep(dataset, base,
                            {{"decompose", [](QueryEngine& e) { e.decompose_enabled = true; }},
                             {"no-decompose", [](QueryEngine& e) { e.decompose_enabled = false; }}},
                            jobs);
}

}  // namespace gsw
