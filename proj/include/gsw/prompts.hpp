#pragma once

// Prompt templates with named placeholders ({title}, {text}, {previous_gsw},
// {query}, {evidence}). Built-in defaults can be overridden by a directory of
// <id>.txt files.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "gsw/core.hpp"

namespace gsw {

class PromptStore {
public:
    static PromptStore defaults() {
        PromptStore store;
        store.templates_["gsw_extract"] = kExtractTemplate;
        store.templates_["gsw_refine"] = kRefineTemplate;
        store.templates_["decompose"] = kDecomposeTemplate;
        store.templates_["answer"] = kAnswerTemplate;
        store.templates_["answer_abstain"] = kAnswerAbstainTemplate;
        return store;
    }

    // Overrides/extends templates from <id>.txt files in dir.
    void load_dir(const std::string& dir) {
        namespace fs = std::filesystem;
        if (!fs::is_directory(dir)) throw ConfigError("prompt dir '" + dir + "' not found");
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
            std::ifstream in(entry.path(), std::ios::binary);
            std::ostringstream ss;
            ss << in.rdbuf();
            templates_[entry.path().stem().string()] = ss.str();
        }
    }

    bool has(const std::string& id) const { return templates_.count(id) > 0; }

    const std::string& require(const std::string& id) const {
        auto it = templates_.find(id);
        if (it == templates_.end()) throw ConfigError("prompt template '" + id + "' does not exist");
        return it->second;
    }

    std::string render(const std::string& id, const std::map<std::string, std::string>& vars) const {
        std::string out = require(id);
        for (const auto& [key, value] : vars) {
            std::string token = "{" + key + "}";
            size_t pos = 0;
            while ((pos = out.find(token, pos)) != std::string::npos) {
                out.replace(pos, token.size(), value);
                pos += value.size();
            }
        }
        return out;
    }

    void set(const std::string& id, std::string text) { templates_[id] = std::move(text); }

private:
    std::map<std::string, std::string> templates_;

    static constexpr const char* kExtractTemplate =
        R"(You build a structured semantic workspace from one document.
Read the document and list the entities it mentions, the verb phrases linking
them, and question-answer pairs grounded in those verb phrases.

Output format: three sections, pipe-separated fields, one record per line.
ENTITIES
<entity id> | <surface form> | <role>: <state>, <state> | <role>: <state>
VERBS
<verb id> | <verb phrase> | <participant entity ids, comma separated>
QA
<qa id> | <verb id> | <question> | <answer text> | <answer entity ids, comma separated>

Rules:
- Use ids E1, E2, ... for entities, V1, ... for verbs, Q1, ... for QA pairs,
  unique within this document.
- Every QA pair must reference one verb id; answers should name entities.
- Write both directions of a relation as QA pairs when the text states them.
- Use only information stated in the document.

Title: {title}
Text: {text}
)";

    static constexpr const char* kRefineTemplate =
        R"(You are given a document and a partially constructed semantic workspace
for it. Inspect the workspace and repair structural deficiencies: add missing
entities, verb phrases and inverse question-answer pairs, and correct
malformed records. Emit the full corrected workspace in the same
ENTITIES / VERBS / QA format.

Title: {title}
Text: {text}

Current workspace:
{previous_gsw}
)";

    static constexpr const char* kDecomposeTemplate =
        R"(Rewrite the question into one or more parallel sequences of single-hop
sub-questions. Later sub-questions may reference the answer of the previous
step of the same sequence with the placeholder <ENTITY_Qn>, where n is that
step number.

Output format:
SEQUENCE
Q1 | <first sub-question, fully concrete> | seed: <the entity it starts from>
Q2 | <follow-up containing <ENTITY_Q1>> | ref: Q1
Repeat the SEQUENCE block for parallel branches. A question that is already
atomic produces one sequence with a single line.

Question: {query}
)";

    static constexpr const char* kAnswerTemplate =
        R"(Answer the question using only the question-answer evidence below. Do not
use outside knowledge. Finish with a final line of the form
"Answer: <short answer>".

Question: {query}
Evidence:
{evidence}
)";

    static constexpr const char* kAnswerAbstainTemplate =
        R"(Answer the question using only the question-answer evidence below. Do not
use outside knowledge. If the evidence is insufficient to answer, finish with
the line "Answer: N/A". Otherwise finish with a final line of the form
"Answer: <short answer>".

Question: {query}
Evidence:
{evidence}
)";
};

}  // namespace gsw
