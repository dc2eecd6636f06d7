// Command-line surface for the workspace pipeline: ingest documents into a
// workspace store, build the dual index snapshot, answer questions over it,
// inspect plans and traces, and run evaluations and ablation sweeps.

#include <atomic>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"

#include "gsw/core.hpp"
#include "gsw/evalkit.hpp"
#include "gsw/extraction.hpp"
#include "gsw/indexing.hpp"
#include "gsw/pipeline.hpp"
#include "gsw/planner.hpp"
#include "gsw/ricr.hpp"

namespace {

using namespace gsw;

struct CommonFlags {
    std::string config_path;
    int jobs = 0;  // 0 -> config value
    // ricr overrides; negative/empty means "leave config value"
    int beam_width = -1;
    int candidates_k = -1;
    std::string scoring;
    double alpha = -1.0;
    std::string search;
    bool no_rerank = false;
    bool abstain = false;
    bool no_abstain = false;
    bool no_decompose = false;
    long seed = -1;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool with_config = true) {
    if (with_config) cmd->add_option("--config", flags.config_path, "pipeline config file (JSON)");
    cmd->add_option("--beam-width", flags.beam_width, "chains kept per hop");
    cmd->add_option("--candidates-k", flags.candidates_k, "candidates per hop");
    cmd->add_option("--scoring", flags.scoring, "cumulative|similarity|combined|greedy");
    cmd->add_option("--alpha", flags.alpha, "combined-mode interpolation weight");
    cmd->add_option("--search", flags.search, "dual|entity_only|qa_only");
    cmd->add_flag("--no-rerank", flags.no_rerank, "keep candidates in retrieval order");
    cmd->add_flag("--abstain", flags.abstain, "instruct the answer model to output N/A when unsupported");
    cmd->add_flag("--no-abstain", flags.no_abstain, "always answer");
    cmd->add_flag("--no-decompose", flags.no_decompose, "skip decomposition (single-hop plan)");
    cmd->add_option("--jobs", flags.jobs, "parallel workers");
    cmd->add_option("--seed", flags.seed, "override config seed");
}

PipelineConfig effective_config(const CommonFlags& flags) {
    PipelineConfig cfg = flags.config_path.empty() ? PipelineConfig{} : load_pipeline_config(flags.config_path);
    if (flags.beam_width > 0) cfg.ricr.beam_width = flags.beam_width;
    if (flags.candidates_k > 0) cfg.ricr.candidates_k = flags.candidates_k;
    if (!flags.scoring.empty()) cfg.ricr.scoring_mode = scoring_mode_from_string(flags.scoring);
    if (flags.alpha >= 0.0) cfg.ricr.alpha = flags.alpha;
    if (!flags.search.empty()) cfg.ricr.search_mode = search_mode_from_string(flags.search);
    if (flags.no_rerank) cfg.ricr.rerank_enabled = false;
    if (flags.abstain) cfg.abstain = true;
    if (flags.no_abstain) cfg.abstain = false;
    if (flags.no_decompose) cfg.decompose = false;
    if (flags.jobs > 0) cfg.jobs = flags.jobs;
    if (flags.seed >= 0) cfg.seed = static_cast<uint64_t>(flags.seed);
    cfg.ricr.validate();
    return cfg;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp + "' for writing");
        out << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
}

struct LoadedEngine {
    RuntimeBundle runtime;
    EntityIndex entity_idx;
    QaVectorIndex qa_idx;
    QueryEngine engine;
};

std::unique_ptr<LoadedEngine> load_engine(const std::string& snapshot, const PipelineConfig& cfg) {
    auto out = std::make_unique<LoadedEngine>();
    out->runtime = build_runtime(cfg);
    auto [entity_idx, qa_idx] =
        load_indices(snapshot, {out->runtime.embedder->name(), out->runtime.embedder->dimension()});
    out->entity_idx = std::move(entity_idx);
    out->qa_idx = std::move(qa_idx);
    out->engine.entity_index = &out->entity_idx;
    out->engine.qa_index = &out->qa_idx;
    out->engine.embedder = out->runtime.embedder.get();
    out->engine.reranker = out->runtime.reranker.get();
    out->engine.decomposer = out->runtime.decomposer.get();
    out->engine.answerer = out->runtime.answerer.get();
    out->engine.prompts = &out->runtime.prompts;
    out->engine.ricr = cfg.ricr;
    out->engine.abstain_enabled = cfg.abstain;
    out->engine.decompose_enabled = cfg.decompose;
    return out;
}

int cmd_ingest(const std::string& corpus_path, const std::string& store_path, const CommonFlags& flags,
               double fail_threshold_flag) {
    PipelineConfig cfg = effective_config(flags);
    if (fail_threshold_flag >= 0.0) cfg.ingest_failure_threshold = fail_threshold_flag;
    RuntimeBundle runtime = build_runtime(cfg);

    ExtractionConfig extraction_cfg = cfg.extraction_cfg;
    if (extraction_cfg.timestamp_override.empty() && cfg.extraction.backend == "stub")
        extraction_cfg.timestamp_override = "1970-01-01T00:00:00Z";  // byte-stable stub runs

    auto docs = load_corpus_documents(corpus_path);
    Corpus corpus;
    if (std::filesystem::exists(store_path)) corpus = load_workspaces(store_path);
    corpus.documents = docs;

    std::vector<const Document*> pending;
    for (const auto& doc : docs)
        if (!corpus.workspaces.count(doc.doc_id)) pending.push_back(&doc);

    std::atomic<size_t> next{0};
    std::atomic<size_t> failures{0};
    std::mutex mu;
    std::vector<std::pair<std::string, Workspace>> extracted;
    std::vector<std::string> errors;

    int jobs = std::max(1, cfg.jobs);
    if (!runtime.extractor->concurrent_safe()) jobs = 1;
    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= pending.size()) return;
            const Document& doc = *pending[i];
            try {
                Workspace ws = extract_workspace(doc, *runtime.extractor, runtime.prompts, extraction_cfg);
                std::lock_guard<std::mutex> lock(mu);
                extracted.emplace_back(doc.doc_id, std::move(ws));
            } catch (const std::exception& e) {
                failures.fetch_add(1);
                std::lock_guard<std::mutex> lock(mu);
                errors.push_back(doc.doc_id + ": " + e.what());
            }
        }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < std::min<int>(jobs, std::max<int>(1, static_cast<int>(pending.size()))); ++i)
        pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    for (auto& [doc_id, ws] : extracted) corpus.workspaces.emplace(doc_id, std::move(ws));
    save_workspaces(corpus, store_path);

    for (const auto& err : errors) std::cerr << "extraction failed: " << err << "\n";
    size_t skipped = docs.size() - pending.size();
    std::cout << "ingested " << extracted.size() << " new, skipped " << skipped << " existing, failed "
              << failures.load() << " of " << docs.size() << " documents -> " << store_path << "\n";

    double rate = docs.empty() ? 0.0 : static_cast<double>(failures.load()) / static_cast<double>(docs.size());
    return rate > cfg.ingest_failure_threshold ? 2 : 0;
}

int cmd_index(const std::string& store_path, const std::string& out_dir, const CommonFlags& flags) {
    PipelineConfig cfg = effective_config(flags);
    RuntimeBundle runtime = build_runtime(cfg);
    Corpus corpus = load_workspaces(store_path);
    auto entity_idx = build_entity_index(corpus, cfg.ricr.index_params);
    auto qa_idx = build_qa_index(corpus, *runtime.embedder, cfg.ricr.index_params);
    snapshot_indices(entity_idx, qa_idx, out_dir);
    std::ifstream manifest(std::filesystem::path(out_dir) / "manifest.json");
    std::cout << manifest.rdbuf();
    return 0;
}

int cmd_query(const std::string& question, const std::string& snapshot, const std::string& trace_path,
              const CommonFlags& flags) {
    PipelineConfig cfg = effective_config(flags);
    auto loaded = load_engine(snapshot, cfg);
    auto outcome = loaded->engine.run(question);

    std::cout << "answer: " << outcome.answer.extracted_answer << "\n";
    std::cout << "context_tokens: " << outcome.answer.prompt_tokens << "\n";
    std::cout << "evidence (" << outcome.retrieval.evidence_rows.size() << " QA pairs):\n";
    int n = 0;
    for (int row : outcome.retrieval.evidence_rows) {
        const auto& pair = loaded->qa_idx.pairs[static_cast<size_t>(row)].pair;
        std::cout << "  " << ++n << ". Q: " << pair.question << " A: " << pair.answer_text << "\n";
    }
    if (!trace_path.empty()) {
        write_text_atomic(trace_path, outcome.retrieval.trace.dump(2) + "\n");
        std::cout << "trace written to " << trace_path << "\n";
    }
    return 0;
}

int cmd_decompose(const std::string& question, bool as_json, const CommonFlags& flags) {
    PipelineConfig cfg = effective_config(flags);
    RuntimeBundle runtime = build_runtime(cfg);
    DecompositionPlan plan = cfg.decompose ? decompose(question, *runtime.decomposer, runtime.prompts)
                                           : fallback_plan(question);
    if (as_json) {
        std::cout << plan_to_json(plan).dump(2) << "\n";
        return 0;
    }
    std::cout << "query: " << plan.original_query << "\n";
    for (size_t s = 0; s < plan.sequences.size(); ++s) {
        std::cout << "sequence " << s + 1 << ":\n";
        for (size_t t = 0; t < plan.sequences[s].size(); ++t) {
            const auto& sub = plan.sequences[s][t];
            std::cout << "  Q" << t + 1 << ": " << sub.text;
            if (!sub.seed_argument.empty()) std::cout << "  [seed: " << sub.seed_argument << "]";
            if (sub.ref_hop) std::cout << "  [binds Q" << *sub.ref_hop << "]";
            std::cout << "\n";
        }
    }
    return 0;
}

int cmd_trace(const std::string& trace_path) {
    std::ifstream in(trace_path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + trace_path + "'");
    json trace;
    in >> trace;
    std::cout << render_trace_text(trace);
    return 0;
}

int cmd_eval(const std::string& dataset_path, const std::string& snapshot, const std::string& report_path,
             const std::string& table_path, const CommonFlags& flags) {
    PipelineConfig cfg = effective_config(flags);
    auto loaded = load_engine(snapshot, cfg);
    auto dataset = load_question_records(dataset_path);
    json echo = cfg.echo.is_null() ? json::object() : cfg.echo;
    echo["effective_ricr"] = {{"beam_width", cfg.ricr.beam_width},
                              {"candidates_k", cfg.ricr.candidates_k},
                              {"scoring", to_string(cfg.ricr.scoring_mode)},
                              {"alpha", cfg.ricr.alpha},
                              {"search", to_string(cfg.ricr.search_mode)},
                              {"rerank", cfg.ricr.rerank_enabled}};
    echo["seed"] = cfg.seed;
    EvalReport report = run_eval(dataset, loaded->engine.as_query_fn(), echo, std::max(1, cfg.jobs));

    write_text_atomic(report_path, report_to_json(report).dump(2) + "\n");
    if (!table_path.empty()) write_text_atomic(table_path, report_to_table(report));
    const auto& a = report.aggregates;
    std::cout << "records: " << a.records << "  mean_em: " << a.mean_em << "  mean_f1: " << a.mean_f1
              << "  mean_context_tokens: " << a.mean_context_tokens << "\n";
    if (a.unanswerable > 0)
        std::cout << "ans_f1: " << a.ans_f1 << "  unans_accuracy: " << a.unans_accuracy << "\n";
    std::cout << "report written to " << report_path << "\n";
    return 0;
}

int cmd_sweep(const std::string& axis, const std::string& dataset_path, const std::string& snapshot,
              const std::string& report_path, const std::string& values_csv, const std::string& distractor_store,
              const std::string& steps_csv, const CommonFlags& flags) {
    PipelineConfig cfg = effective_config(flags);
    auto dataset = load_question_records(dataset_path);

    json out = {{"axis", axis}, {"seed", cfg.seed}, {"points", json::array()}};
    auto push_points = [&](const std::vector<SweepPoint>& points) {
        for (const auto& p : points)
            out["points"].push_back({{"value", p.value},
                                     {"mean_em", p.aggregates.mean_em},
                                     {"mean_f1", p.aggregates.mean_f1},
                                     {"mean_context_tokens", p.aggregates.mean_context_tokens},
                                     {"ans_f1", p.aggregates.ans_f1},
                                     {"unans_accuracy", p.aggregates.unans_accuracy}});
    };

    if (axis == "growth") {
        if (distractor_store.empty() || steps_csv.empty())
            throw ConfigError("growth sweep needs --distractor-store and --steps");
        RuntimeBundle runtime = build_runtime(cfg);
        Corpus base = load_workspaces(snapshot);  // here: a workspace store, not an index snapshot
        Corpus distractors = load_workspaces(distractor_store);

        std::vector<Document> relevant, pool;
        for (const auto& [doc_id, ws] : base.workspaces) relevant.push_back({doc_id, ws.title, ""});
        for (const auto& [doc_id, ws] : distractors.workspaces) pool.push_back({doc_id, ws.title, ""});
        std::vector<size_t> steps;
        for (const auto& part : split(steps_csv, ','))
            if (!trim(part).empty()) steps.push_back(static_cast<size_t>(std::stoul(trim(part))));

        CorpusEvalFn evaluate = [&](const std::vector<Document>& docs) {
            Corpus merged;
            merged.documents = docs;
            for (const auto& d : docs) {
                auto it = base.workspaces.find(d.doc_id);
                if (it == base.workspaces.end()) it = distractors.workspaces.find(d.doc_id);
                merged.workspaces.emplace(d.doc_id, it->second);
            }
            auto entity_idx = build_entity_index(merged, cfg.ricr.index_params);
            auto qa_idx = build_qa_index(merged, *runtime.embedder, cfg.ricr.index_params);
            QueryEngine engine;
            engine.entity_index = &entity_idx;
            engine.qa_index = &qa_idx;
            engine.embedder = runtime.embedder.get();
            engine.reranker = runtime.reranker.get();
            engine.decomposer = runtime.decomposer.get();
            engine.answerer = runtime.answerer.get();
            engine.prompts = &runtime.prompts;
            engine.ricr = cfg.ricr;
            engine.abstain_enabled = cfg.abstain;
            engine.decompose_enabled = cfg.decompose;
            return run_eval(dataset, engine.as_query_fn(), {{"corpus_size", docs.size()}}, std::max(1, cfg.jobs));
        };
        auto sweep = corpus_growth_sweep(relevant, pool, steps, evaluate, cfg.seed);
        out["growth"] = growth_to_json(sweep);
        for (const auto& step : sweep.steps)
            out["points"].push_back({{"value", std::to_string(step.corpus_size)}, {"mean_f1", step.mean_f1}});
    } else {
        auto loaded = load_engine(snapshot, cfg);
        if (axis == "scoring") {
            push_points(sweep_scoring(dataset, loaded->engine,
                                      {ScoringMode::cumulative, ScoringMode::greedy, ScoringMode::similarity,
                                       ScoringMode::combined},
                                      std::max(1, cfg.jobs)));
        } else if (axis == "beam") {
            std::vector<int> widths;
            for (const auto& part : split(values_csv.empty() ? std::string("1,3,5,10") : values_csv, ','))
                if (!trim(part).empty()) widths.push_back(std::stoi(trim(part)));
            push_points(sweep_beam_width(dataset, loaded->engine, widths, std::max(1, cfg.jobs)));
        } else if (axis == "search") {
            push_points(sweep_search_mode(dataset, loaded->engine, std::max(1, cfg.jobs)));
        } else if (axis == "rerank") {
            push_points(sweep_rerank(dataset, loaded->engine, std::max(1, cfg.jobs)));
        } else if (axis == "decompose") {
            push_points(sweep_decompose(dataset, loaded->engine, std::max(1, cfg.jobs)));
        } else {
            throw ConfigError("unknown sweep axis '" + axis + "'");
        }
    }

    write_text_atomic(report_path, out.dump(2) + "\n");
    for (const auto& p : out["points"])
        std::cout << axis << "=" << p.value("value", "") << "  mean_f1=" << p.value("mean_f1", 0.0) << "\n";
    std::cout << "sweep report written to " << report_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"structured-memory retrieval pipeline"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string corpus_path, store_path, snapshot, question, trace_path, dataset_path;
    std::string report_path = "report.json";
    std::string table_path, axis, values_csv, distractor_store, steps_csv;
    double fail_threshold = -1.0;
    bool as_json = false;

    auto* ingest = app.add_subcommand("ingest", "extract workspaces from a corpus file");
    ingest->add_option("--corpus", corpus_path, "line-delimited {doc_id,title,text} records")->required();
    ingest->add_option("--store", store_path, "workspace store to create or extend")->required();
    ingest->add_option("--fail-threshold", fail_threshold, "max tolerated failure rate");
    add_common_flags(ingest, flags);

    auto* index = app.add_subcommand("index", "build the dual index snapshot from a store");
    index->add_option("--store", store_path, "workspace store")->required();
    index->add_option("--out", snapshot, "snapshot directory")->required();
    add_common_flags(index, flags);

    auto* query = app.add_subcommand("query", "answer one question");
    query->add_option("question", question, "the question")->required();
    query->add_option("--snapshot", snapshot, "index snapshot directory")->required();
    query->add_option("--trace", trace_path, "write the retrieval trace to this file");
    add_common_flags(query, flags);

    auto* decompose_cmd = app.add_subcommand("decompose", "print the decomposition plan");
    decompose_cmd->add_option("question", question, "the question")->required();
    decompose_cmd->add_flag("--json", as_json, "emit the plan as JSON");
    add_common_flags(decompose_cmd, flags);

    auto* trace_cmd = app.add_subcommand("trace", "render a trace file as text tables");
    trace_cmd->add_option("file", trace_path, "trace JSON file")->required();

    auto* eval = app.add_subcommand("eval", "evaluate a question dataset");
    eval->add_option("--dataset", dataset_path, "line-delimited question records")->required();
    eval->add_option("--snapshot", snapshot, "index snapshot directory")->required();
    eval->add_option("--out", report_path, "report JSON path");
    eval->add_option("--table", table_path, "flat per-record TSV path");
    add_common_flags(eval, flags);

    auto* sweep = app.add_subcommand("sweep", "ablation sweeps over one axis");
    sweep->add_option("--axis", axis, "scoring|beam|search|rerank|decompose|growth")->required();
    sweep->add_option("--dataset", dataset_path, "line-delimited question records")->required();
    sweep->add_option("--snapshot", snapshot, "index snapshot (growth: base workspace store)")->required();
    sweep->add_option("--out", report_path, "sweep report JSON path");
    sweep->add_option("--values", values_csv, "comma-separated values (beam widths)");
    sweep->add_option("--distractor-store", distractor_store, "workspace store of distractor documents");
    sweep->add_option("--steps", steps_csv, "comma-separated corpus sizes for growth");
    add_common_flags(sweep, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors exit 1, --help exits 0
    }

    try {
        if (*ingest) return cmd_ingest(corpus_path, store_path, flags, fail_threshold);
        if (*index) return cmd_index(store_path, snapshot, flags);
        if (*query) return cmd_query(question, snapshot, trace_path, flags);
        if (*decompose_cmd) return cmd_decompose(question, as_json, flags);
        if (*trace_cmd) return cmd_trace(trace_path);
        if (*eval) return cmd_eval(dataset_path, snapshot, report_path, table_path, flags);
        if (*sweep)
            return cmd_sweep(axis, dataset_path, snapshot, report_path, values_csv, distractor_store, steps_csv,
                             flags);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
