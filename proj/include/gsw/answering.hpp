#pragma once

// Answer generation from retrieved QA evidence. The rendered prompt carries
// only QA pairs and their role/state annotations, never source-document text;
// that property is what keeps answer-context token counts small.

#include <set>
#include <string>
#include <vector>

#include "gsw/clients.hpp"
#include "gsw/core.hpp"
#include "gsw/prompts.hpp"

namespace gsw {

// The canonical non-answer token. Comparison trims and case-folds, nothing
// more, so "n/a" abstains but "not available" does not.
inline constexpr const char* kNonAnswerToken = "N/A";

inline bool is_non_answer(const std::string& text) { return to_lower(trim(text)) == "n/a"; }

struct AnswerRequest {
    std::string query;
    std::vector<QaPair> evidence;  // deduplicated upstream, chain-rank order
    bool abstain_enabled = true;
    std::string prompt_template_id;  // empty -> pick by abstain flag
};

struct AnswerResult {
    std::string raw_text;
    std::string extracted_answer;
    bool abstained = false;
    long prompt_tokens = 0;
    long completion_tokens = 0;
    std::string rendered_prompt;  // the user message sent to the client
};

// One numbered line per pair: question, answer, annotation summary.
inline std::string render_evidence(const std::vector<QaPair>& evidence) {
    if (evidence.empty()) return "(no evidence)";
    std::set<std::string> ids;
    for (const auto& qa : evidence)
        if (!ids.insert(qa.doc_id + "\x1f" + qa.id).second)
            throw ContractError("render_evidence: duplicate pair '" + qa.id + "' (dedup happens upstream)");

    std::ostringstream out;
    int n = 0;
    for (const auto& qa : evidence) {
        out << ++n << ". Q: " << qa.question << " A: " << qa.answer_text;
        if (!qa.annotations.empty()) {
            out << " | ";
            for (size_t i = 0; i < qa.annotations.size(); ++i) {
                if (i) out << "; ";
                out << qa.annotations[i].role << ": " << join(qa.annotations[i].states, ", ");
            }
        }
        out << "\n";
    }
    std::string text = out.str();
    if (!text.empty() && text.back() == '\n') text.pop_back();
    return text;
}

// The last line beginning "Answer:" wins; free-form completions fall back to
// the whole trimmed text.
inline std::string extract_final_answer(const std::string& raw) {
    std::string found;
    std::istringstream in(raw);
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        std::string lower = to_lower(t);
        if (lower.rfind("answer:", 0) == 0) found = trim(t.substr(7));
    }
    if (!found.empty()) return found;
    return trim(raw);
}

inline AnswerResult answer(const AnswerRequest& req, ModelClient& client, const PromptStore& prompts) {
    std::string template_id = req.prompt_template_id;
    if (template_id.empty()) template_id = req.abstain_enabled ? "answer_abstain" : "answer";

    std::string rendered = prompts.render(template_id, {{"query", req.query}, {"evidence", render_evidence(req.evidence)}});
    ModelRequest mreq;
    mreq.messages.push_back({"user", rendered});
    mreq.temperature = 0.0;
    ModelResponse resp = client.complete(mreq);

    AnswerResult result;
    result.raw_text = resp.text;
    result.rendered_prompt = rendered;
    result.prompt_tokens = resp.prompt_tokens;
    result.completion_tokens = resp.completion_tokens;
    if (trim(resp.text).empty()) throw Error("answer model returned empty completion");
    result.extracted_answer = extract_final_answer(resp.text);
    result.abstained = is_non_answer(result.extracted_answer);
    return result;
}

}  // namespace gsw
