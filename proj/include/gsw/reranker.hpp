#pragma once

// Cross-encoder reranking interface. Backends must emit scores in [0, 1];
// retrieval clamps them into [kScoreFloor, 1] before chain scoring so the
// geometric mean stays defined.

#include <map>
#include <string>
#include <vector>

#include "gsw/embedder.hpp"

namespace gsw {

inline constexpr double kScoreFloor = 1e-6;

inline double clamp_score(double s) {
    if (s < kScoreFloor) return kScoreFloor;
    if (s > 1.0) return 1.0;
    return s;
}

class Reranker {
public:
    virtual ~Reranker() = default;
    virtual std::string name() const = 0;
    virtual std::vector<double> score(const std::string& query, const std::vector<std::string>& candidates) = 0;
};

// F1 overlap between unique token sets; deterministic stand-in for a hosted
// cross-encoder in offline pipelines.
class TokenOverlapReranker : public Reranker {
public:
    std::string name() const override { return "token-overlap"; }

    std::vector<double> score(const std::string& query, const std::vector<std::string>& candidates) override {
        std::map<std::string, int> qset;
        for (const auto& t : tokenize(query)) qset[t] = 1;
        std::vector<double> out;
        out.reserve(candidates.size());
        for (const auto& cand : candidates) {
            std::map<std::string, int> cset;
            for (const auto& t : tokenize(cand)) cset[t] = 1;
            size_t inter = 0;
            for (const auto& [tok, _] : cset)
                if (qset.count(tok)) ++inter;
            if (inter == 0 || qset.empty() || cset.empty()) {
                out.push_back(0.0);
                continue;
            }
            double p = static_cast<double>(inter) / static_cast<double>(cset.size());
            double r = static_cast<double>(inter) / static_cast<double>(qset.size());
            out.push_back(2.0 * p * r / (p + r));
        }
        return out;
    }
};

// Rule table for fixtures: first rule whose query matches exactly and whose
// needle occurs in the candidate text wins. Rules are checked in insertion
// order; unmatched candidates get the fallback score.
class ScriptedReranker : public Reranker {
public:
    explicit ScriptedReranker(double fallback = 0.05) : fallback_(fallback) {}

    void add_rule(const std::string& query, const std::string& candidate_substring, double score) {
        rules_.push_back({query, candidate_substring, score});
    }

    std::string name() const override { return "scripted"; }

    std::vector<double> score(const std::string& query, const std::vector<std::string>& candidates) override {
        std::vector<double> out;
        out.reserve(candidates.size());
        for (const auto& cand : candidates) {
            double s = fallback_;
            for (const auto& rule : rules_) {
                if (rule.query == query && cand.find(rule.needle) != std::string::npos) {
                    s = rule.score;
                    break;
                }
            }
            out.push_back(s);
        }
        return out;
    }

private:
    struct Rule {
        std::string query;
        std::string needle;
        double score;
    };
    std::vector<Rule> rules_;
    double fallback_;
};

}  // namespace gsw
