#pragma once

// Metrics and experiment harnesses: normalized EM/F1, token-efficiency
// accounting, answerable/unanswerable evaluation, ablation sweeps, and the
// corpus-growth robustness experiment.
//
// Answer normalization (version 1, pinned because EM/F1 depend on it):
// lowercase, delete punctuation characters, drop the articles a/an/the as
// whole tokens, collapse whitespace.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "gsw/answering.hpp"
#include "gsw/core.hpp"

namespace gsw {

inline std::string normalize_answer(const std::string& text) {
    std::string lowered;
    lowered.reserve(text.size());
    for (unsigned char c : text) {
        if (std::isalnum(c) || std::isspace(c) || c >= 0x80)
            lowered.push_back(static_cast<char>(std::tolower(c)));
        // punctuation is deleted outright, so "n/a" -> "na"
    }
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : lowered) {
        if (std::isspace(c)) {
            if (!cur.empty()) tokens.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(static_cast<char>(c));
        }
    }
    if (!cur.empty()) tokens.push_back(cur);
    std::vector<std::string> kept;
    for (auto& t : tokens)
        if (t != "a" && t != "an" && t != "the") kept.push_back(std::move(t));
    return join(kept, " ");
}

inline std::vector<std::string> normalized_tokens(const std::string& text) {
    auto norm = normalize_answer(text);
    if (norm.empty()) return {};
    return split(norm, ' ');
}

inline int exact_match(const std::string& pred, const std::vector<std::string>& golds) {
    auto p = normalize_answer(pred);
    for (const auto& g : golds)
        if (p == normalize_answer(g)) return 1;
    return 0;
}

// Token-level F1 over normalized multisets, max across golds. Empty-vs-empty
// counts 1.0, empty-vs-nonempty 0.0.
inline double f1_single(const std::string& pred, const std::string& gold) {
    auto ptoks = normalized_tokens(pred);
    auto gtoks = normalized_tokens(gold);
    if (ptoks.empty() && gtoks.empty()) return 1.0;
    if (ptoks.empty() || gtoks.empty()) return 0.0;
    std::map<std::string, int> gcount;
    for (const auto& t : gtoks) ++gcount[t];
    int overlap = 0;
    for (const auto& t : ptoks) {
        auto it = gcount.find(t);
        if (it != gcount.end() && it->second > 0) {
            ++overlap;
            --it->second;
        }
    }
    if (overlap == 0) return 0.0;
    double precision = static_cast<double>(overlap) / static_cast<double>(ptoks.size());
    double recall = static_cast<double>(overlap) / static_cast<double>(gtoks.size());
    return 2.0 * precision * recall / (precision + recall);
}

inline double f1(const std::string& pred, const std::vector<std::string>& golds) {
    double best = 0.0;
    if (golds.empty()) return f1_single(pred, "");
    for (const auto& g : golds) best = std::max(best, f1_single(pred, g));
    return best;
}

// ---------------------------------------------------------------------------
// datasets and records

struct QuestionRecord {
    std::string query_id;
    std::string question;
    std::vector<std::string> golds;
    bool answerable = true;
};

inline std::vector<QuestionRecord> load_question_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<QuestionRecord> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            json j = json::parse(line);
            QuestionRecord r;
            r.query_id = j.at("query_id").get<std::string>();
            r.question = j.at("question").get<std::string>();
            r.golds = j.value("golds", std::vector<std::string>{});
            r.answerable = j.value("answerable", true);
            out.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw IoError("line " + std::to_string(line_no) + ": malformed question record: " + e.what());
        }
    }
    return out;
}

struct EvalRecord {
    std::string query_id;
    std::string query;
    std::vector<std::string> gold_answers;
    bool answerable = true;
    AnswerResult prediction;
    long context_tokens = 0;
    int em = 0;
    double f1 = 0.0;
    std::optional<int> refusal_correct;  // present iff !answerable
    int evidence_count = 0;
    std::string error;  // per-record pipeline failure, non-fatal
};

struct EvalAggregates {
    size_t records = 0;
    size_t answerable = 0;
    size_t unanswerable = 0;
    size_t errors = 0;
    double mean_em = 0.0;
    double mean_f1 = 0.0;
    double mean_context_tokens = 0.0;
    double ans_f1 = 0.0;          // F1 over the answerable subset
    double unans_accuracy = 0.0;  // refusal accuracy over the unanswerable subset
};

inline EvalAggregates recompute_aggregates(const std::vector<EvalRecord>& records) {
    EvalAggregates agg;
    agg.records = records.size();
    double em_sum = 0, f1_sum = 0, tok_sum = 0, ans_f1_sum = 0, refusal_sum = 0;
    for (const auto& r : records) {
        if (!r.error.empty()) ++agg.errors;
        em_sum += r.em;
        f1_sum += r.f1;
        tok_sum += static_cast<double>(r.context_tokens);
        if (r.answerable) {
            ++agg.answerable;
            ans_f1_sum += r.f1;
        } else {
            ++agg.unanswerable;
            refusal_sum += r.refusal_correct.value_or(0);
        }
    }
    if (agg.records) {
        agg.mean_em = em_sum / static_cast<double>(agg.records);
        agg.mean_f1 = f1_sum / static_cast<double>(agg.records);
        agg.mean_context_tokens = tok_sum / static_cast<double>(agg.records);
    }
    if (agg.answerable) agg.ans_f1 = ans_f1_sum / static_cast<double>(agg.answerable);
    if (agg.unanswerable) agg.unans_accuracy = refusal_sum / static_cast<double>(agg.unanswerable);
    return agg;
}

struct EvalReport {
    json config_echo;
    std::vector<EvalRecord> records;  // ordered by query_id
    EvalAggregates aggregates;
};

// The per-query pipeline under evaluation: question in, answer + usage out.
struct QueryOutcome {
    AnswerResult answer;
    int evidence_count = 0;
    json trace;
};
using QueryFn = std::function<QueryOutcome(const std::string& question)>;

inline EvalRecord evaluate_one(const QuestionRecord& q, const QueryFn& pipeline) {
    EvalRecord rec;
    rec.query_id = q.query_id;
    rec.query = q.question;
    rec.gold_answers = q.golds;
    rec.answerable = q.answerable;
    try {
        QueryOutcome outcome = pipeline(q.question);
        rec.prediction = outcome.answer;
        rec.evidence_count = outcome.evidence_count;
        rec.context_tokens = outcome.answer.prompt_tokens;
        if (q.answerable) {
            rec.em = exact_match(outcome.answer.extracted_answer, q.golds);
            rec.f1 = f1(outcome.answer.extracted_answer, q.golds);
        } else {
            rec.refusal_correct = outcome.answer.abstained ? 1 : 0;
        }
    } catch (const std::exception& e) {
        rec.error = e.what();
        if (!q.answerable) rec.refusal_correct = 0;
    }
    return rec;
}

// Evaluates every record exactly once, optionally in parallel; the report is
// a deterministic fold ordered by query_id.
inline EvalReport run_eval(const std::vector<QuestionRecord>& dataset, const QueryFn& pipeline,
                           const json& config_echo = json::object(), int jobs = 1) {
    EvalReport report;
    report.config_echo = config_echo;
    report.records.resize(dataset.size());

    if (jobs <= 1 || dataset.size() <= 1) {
        for (size_t i = 0; i < dataset.size(); ++i) report.records[i] = evaluate_one(dataset[i], pipeline);
    } else {
        std::atomic<size_t> next{0};
        auto worker = [&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= dataset.size()) return;
                report.records[i] = evaluate_one(dataset[i], pipeline);
            }
        };
        std::vector<std::thread> pool;
        int n = std::min<int>(jobs, static_cast<int>(dataset.size()));
        for (int i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::sort(report.records.begin(), report.records.end(),
              [](const EvalRecord& a, const EvalRecord& b) { return a.query_id < b.query_id; });
    report.aggregates = recompute_aggregates(report.records);
    return report;
}

inline json record_to_json(const EvalRecord& r) {
    json j = {{"query_id", r.query_id},
              {"query", r.query},
              {"golds", r.gold_answers},
              {"answerable", r.answerable},
              {"prediction", r.prediction.extracted_answer},
              {"abstained", r.prediction.abstained},
              {"context_tokens", r.context_tokens},
              {"em", r.em},
              {"f1", r.f1},
              {"evidence_count", r.evidence_count}};
    if (r.refusal_correct) j["refusal_correct"] = *r.refusal_correct;
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

inline json report_to_json(const EvalReport& report) {
    json records = json::array();
    for (const auto& r : report.records) records.push_back(record_to_json(r));
    const auto& a = report.aggregates;
    return {{"config", report.config_echo},
            {"aggregates",
             {{"records", a.records},
              {"answerable", a.answerable},
              {"unanswerable", a.unanswerable},
              {"errors", a.errors},
              {"mean_em", a.mean_em},
              {"mean_f1", a.mean_f1},
              {"mean_context_tokens", a.mean_context_tokens},
              {"ans_f1", a.ans_f1},
              {"unans_accuracy", a.unans_accuracy}}},
            {"token_counting", "client usage report; stub clients count whitespace tokens"},
            {"records", records}};
}

// flat one-row-per-record table for spreadsheet inspection
inline std::string report_to_table(const EvalReport& report) {
    std::ostringstream out;
    out << "query_id\tanswerable\tem\tf1\trefusal_correct\tcontext_tokens\tprediction\terror\n";
    for (const auto& r : report.records) {
        out << r.query_id << "\t" << (r.answerable ? 1 : 0) << "\t" << r.em << "\t" << r.f1 << "\t";
        if (r.refusal_correct)
            out << *r.refusal_correct;
        else
            out << "-";
        out << "\t" << r.context_tokens << "\t" << r.prediction.extracted_answer << "\t" << r.error << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// corpus-growth robustness: relevant documents stay fixed while seeded
// distractor samples grow the corpus step by step.

struct GrowthStep {
    size_t corpus_size = 0;
    double mean_f1 = 0.0;
    EvalReport report;
};

struct GrowthSweepResult {
    uint64_t seed = 0;
    std::vector<GrowthStep> steps;
};

using CorpusEvalFn = std::function<EvalReport(const std::vector<Document>& docs)>;

inline GrowthSweepResult corpus_growth_sweep(const std::vector<Document>& relevant,
                                             const std::vector<Document>& distractors,
                                             const std::vector<size_t>& step_sizes, const CorpusEvalFn& evaluate,
                                             uint64_t seed) {
    GrowthSweepResult result;
    result.seed = seed;

    std::vector<size_t> order(distractors.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    for (size_t target : step_sizes) {
        if (target < relevant.size())
            throw ConfigError("growth step " + std::to_string(target) + " smaller than the relevant set (" +
                              std::to_string(relevant.size()) + ")");
        size_t n_distractors = std::min(distractors.size(), target - relevant.size());
        std::vector<Document> docs = relevant;
        for (size_t i = 0; i < n_distractors; ++i) docs.push_back(distractors[order[i]]);

        GrowthStep step;
        step.corpus_size = docs.size();
        step.report = evaluate(docs);
        step.mean_f1 = step.report.aggregates.mean_f1;
        result.steps.push_back(std::move(step));
    }
    return result;
}

inline json growth_to_json(const GrowthSweepResult& result) {
    json steps = json::array();
    for (const auto& s : result.steps) steps.push_back({{"corpus_size", s.corpus_size}, {"mean_f1", s.mean_f1}});
    return {{"seed", result.seed}, {"steps", steps}};
}

}  // namespace gsw
