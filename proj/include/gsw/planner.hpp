#pragma once

// Query decomposition: one model call turns a query into parallel sequences
// of single-hop sub-questions whose later hops bind the previous hop's answer
// through an <ENTITY_Qn> placeholder. Everything after this call is
// non-parametric retrieval and scoring.

#include <optional>
#include <string>
#include <vector>

#include "gsw/clients.hpp"
#include "gsw/core.hpp"
#include "gsw/prompts.hpp"

namespace gsw {

inline std::string placeholder_token(int hop_number) { return "<ENTITY_Q" + std::to_string(hop_number) + ">"; }

struct SubQuestion {
    // concrete text for hop 1, otherwise a template containing one placeholder
    std::string text;
    // 1-based hop number this sub-question binds to (always the previous hop)
    std::optional<int> ref_hop;
    // literal entity the sequence starts from (hop 1 only)
    std::string seed_argument;

    bool operator==(const SubQuestion&) const = default;
};

struct DecompositionPlan {
    std::string original_query;
    std::vector<std::vector<SubQuestion>> sequences;

    bool operator==(const DecompositionPlan&) const = default;
};

inline std::vector<Violation> validate_plan(const DecompositionPlan& plan) {
    std::vector<Violation> out;
    if (plan.sequences.empty()) out.push_back({"empty-plan", "", "plan has no sequences"});
    for (size_t s = 0; s < plan.sequences.size(); ++s) {
        const auto& seq = plan.sequences[s];
        std::string sid = "seq" + std::to_string(s + 1);
        if (seq.empty()) {
            out.push_back({"empty-sequence", sid, "sequence has no sub-questions"});
            continue;
        }
        for (size_t t = 0; t < seq.size(); ++t) {
            const auto& sub = seq[t];
            std::string qid = sid + ".q" + std::to_string(t + 1);
            if (trim(sub.text).empty()) out.push_back({"empty-question", qid, "sub-question blank"});
            if (t == 0) {
                if (sub.ref_hop) out.push_back({"bad-reference", qid, "hop 1 cannot reference an earlier hop"});
            } else {
                if (!sub.ref_hop)
                    out.push_back({"missing-reference", qid, "hop " + std::to_string(t + 1) + " has no binding"});
                else if (*sub.ref_hop != static_cast<int>(t))
                    out.push_back({"bad-reference", qid, "hop must bind the immediately preceding hop"});
                else if (sub.text.find(placeholder_token(*sub.ref_hop)) == std::string::npos)
                    out.push_back({"missing-placeholder", qid,
                                   "template lacks placeholder " + placeholder_token(*sub.ref_hop)});
            }
        }
    }
    return out;
}

// Replaces the placeholder verbatim with the binding; no other mutation.
inline std::string instantiate(const SubQuestion& sub, const std::string& binding) {
    if (!sub.ref_hop) throw ContractError("sub-question has no placeholder to instantiate");
    if (binding.empty()) throw ContractError("placeholder binding is empty");
    std::string token = placeholder_token(*sub.ref_hop);
    auto pos = sub.text.find(token);
    if (pos == std::string::npos)
        throw ContractError("template lacks placeholder " + token + ": " + sub.text);
    std::string out = sub.text;
    out.replace(pos, token.size(), binding);
    return out;
}

// Degenerate plan: the original query as a single one-hop sequence. Used as
// the caller-side fallback when decomposition fails or is disabled.
inline DecompositionPlan fallback_plan(const std::string& query) {
    DecompositionPlan plan;
    plan.original_query = query;
    plan.sequences.push_back({SubQuestion{query, std::nullopt, query}});
    return plan;
}

namespace detail {

// SEQUENCE blocks of "Qn | text | seed: ..." / "Qn | text | ref: Qm" lines
inline DecompositionPlan parse_plan_output(const std::string& text, const std::string& query) {
    DecompositionPlan plan;
    plan.original_query = query;
    std::vector<SubQuestion> current;
    bool in_sequence = false;
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        std::string line = trim(raw);
        if (line.empty()) continue;
        if (line == "SEQUENCE") {
            if (in_sequence && !current.empty()) plan.sequences.push_back(std::move(current));
            current.clear();
            in_sequence = true;
            continue;
        }
        if (!in_sequence) continue;  // preamble chatter is ignored
        auto fields = split(line, '|');
        if (fields.size() < 2) throw ParseError("plan line needs 'Qn | question | seed/ref': " + line);
        SubQuestion sub;
        sub.text = trim(fields[1]);
        if (sub.text.empty()) throw ParseError("plan line has empty question: " + line);
        std::string tail = fields.size() > 2 ? trim(fields[2]) : "";
        if (tail.rfind("seed:", 0) == 0) {
            sub.seed_argument = trim(tail.substr(5));
        } else if (tail.rfind("ref:", 0) == 0) {
            std::string ref = trim(tail.substr(4));
            if (ref.size() < 2 || (ref[0] != 'Q' && ref[0] != 'q'))
                throw ParseError("plan reference must be Qn: " + line);
            sub.ref_hop = std::stoi(ref.substr(1));
        } else if (!tail.empty()) {
            throw ParseError("plan line tail must start with 'seed:' or 'ref:': " + line);
        }
        current.push_back(std::move(sub));
    }
    if (in_sequence && !current.empty()) plan.sequences.push_back(std::move(current));
    if (plan.sequences.empty()) throw ParseError("no SEQUENCE blocks in decomposition output");
    auto violations = validate_plan(plan);
    if (!violations.empty())
        throw ParseError("decomposition plan invalid: " + violations.front().code + " at " +
                         violations.front().subject);
    return plan;
}

}  // namespace detail

// Decomposes once, greedily (temperature 0). One bounded repair re-prompt on
// parse failure, then PlanningError; callers may fall back to fallback_plan.
inline DecompositionPlan decompose(const std::string& query, ModelClient& client, const PromptStore& prompts,
                                   const std::string& template_id = "decompose") {
    if (trim(query).empty()) throw ContractError("query is empty");
    ModelRequest req;
    req.messages.push_back({"user", prompts.render(template_id, {{"query", query}})});
    req.temperature = 0.0;
    req.max_tokens = 1024;

    ModelResponse resp = client.complete(req);
    try {
        return detail::parse_plan_output(resp.text, query);
    } catch (const ParseError&) {
        req.messages.push_back({"user",
                                "The previous output could not be parsed. Re-emit the plan using only SEQUENCE "
                                "blocks with 'Qn | question | seed:/ref:' lines."});
        ModelResponse retry = client.complete(req);
        try {
            return detail::parse_plan_output(retry.text, query);
        } catch (const ParseError& e) {
            throw PlanningError(std::string("decomposition unparseable after repair attempt: ") + e.what());
        }
    }
}

inline json plan_to_json(const DecompositionPlan& plan) {
    json seqs = json::array();
    for (const auto& seq : plan.sequences) {
        json steps = json::array();
        for (const auto& sub : seq) {
            json step = {{"question", sub.text}};
            if (sub.ref_hop) step["ref_hop"] = *sub.ref_hop;
            if (!sub.seed_argument.empty()) step["seed"] = sub.seed_argument;
            steps.push_back(std::move(step));
        }
        seqs.push_back(std::move(steps));
    }
    return {{"query", plan.original_query}, {"sequences", seqs}};
}

inline DecompositionPlan plan_from_json(const json& j) {
    DecompositionPlan plan;
    plan.original_query = j.at("query").get<std::string>();
    for (const auto& seq : j.at("sequences")) {
        std::vector<SubQuestion> steps;
        for (const auto& step : seq) {
            SubQuestion sub;
            sub.text = step.at("question").get<std::string>();
            if (step.contains("ref_hop")) sub.ref_hop = step.at("ref_hop").get<int>();
            if (step.contains("seed")) sub.seed_argument = step.at("seed").get<std::string>();
            steps.push_back(std::move(sub));
        }
        plan.sequences.push_back(std::move(steps));
    }
    return plan;
}

}  // namespace gsw
