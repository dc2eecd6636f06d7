#pragma once

// Workspace construction from raw documents via a chat model. The model's
// output grammar is a line-oriented sectioned format (ENTITIES / VERBS / QA)
// with explicit id back-references; the parser is tolerant and reports
// unrecoverable lines as spans instead of failing wholesale.

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gsw/clients.hpp"
#include "gsw/core.hpp"
#include "gsw/prompts.hpp"

namespace gsw {

struct ExtractionConfig {
    std::string prompt_template_id = "gsw_extract";
    std::string refine_template_id = "gsw_refine";
    bool two_pass = false;
    double temperature = 0.0;  // greedy decoding for deterministic construction
    double top_p = 1.0;
    int max_tokens = 4096;
    double refine_temperature = 0.0;
    // when set, fixed provenance timestamp (deterministic pipelines)
    std::string timestamp_override;
};

struct SpanReport {
    int line_no = 0;
    std::string text;
    std::string reason;
};

struct WorkspaceFragments {
    std::vector<EntityNode> entities;
    std::vector<VerbPhraseNode> verbs;
    std::vector<QaPair> qa_pairs;
    std::vector<SpanReport> reports;
};

struct RepairEntry {
    std::string action;   // e.g. "dropped-qa", "dropped-participant", "removed-qa"
    std::string subject;  // offending id
    std::string detail;
};

inline Workspace refine_workspace(const Workspace& ws, const Document& doc, ModelClient& client,
                                  const PromptStore& prompts, const ExtractionConfig& cfg,
                                  std::vector<RepairEntry>* repairs = nullptr);

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
    auto fields = split(line, '|');
    for (auto& f : fields) f = trim(f);
    return fields;
}

inline std::vector<std::string> split_ids(const std::string& csv) {
    std::vector<std::string> out;
    for (auto& part : split(csv, ',')) {
        auto id = trim(part);
        if (!id.empty()) out.push_back(id);
    }
    return out;
}

// "role: s1, s2" groups after the surface field
inline std::vector<RoleAnnotation> parse_roles(const std::vector<std::string>& fields, size_t from) {
    std::vector<RoleAnnotation> roles;
    for (size_t i = from; i < fields.size(); ++i) {
        auto colon = fields[i].find(':');
        if (colon == std::string::npos) continue;
        RoleAnnotation r;
        r.role = trim(fields[i].substr(0, colon));
        for (auto& s : split(fields[i].substr(colon + 1), ',')) {
            auto st = trim(s);
            if (!st.empty()) r.states.push_back(st);
        }
        if (!r.role.empty()) roles.push_back(std::move(r));
    }
    return roles;
}

}  // namespace detail

// Tolerant parse of the sectioned model output. Throws ParseError only when
// nothing at all is recoverable.
inline WorkspaceFragments parse_model_output(const std::string& text) {
    WorkspaceFragments frags;
    enum class Section { none, entities, verbs, qa };
    Section section = Section::none;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(raw);
        if (line.empty()) continue;
        if (line == "ENTITIES") {
            section = Section::entities;
            continue;
        }
        if (line == "VERBS") {
            section = Section::verbs;
            continue;
        }
        if (line == "QA") {
            section = Section::qa;
            continue;
        }
        auto fields = detail::split_fields(line);
        switch (section) {
            case Section::none:
                frags.reports.push_back({line_no, raw, "content before any section header"});
                break;
            case Section::entities: {
                if (fields.size() < 2 || fields[0].empty() || fields[1].empty()) {
                    frags.reports.push_back({line_no, raw, "entity line needs 'id | surface'"});
                    break;
                }
                frags.entities.push_back({fields[0], fields[1], detail::parse_roles(fields, 2)});
                break;
            }
            case Section::verbs: {
                if (fields.size() < 2 || fields[0].empty() || fields[1].empty()) {
                    frags.reports.push_back({line_no, raw, "verb line needs 'id | phrase | participants'"});
                    break;
                }
                frags.verbs.push_back(
                    {fields[0], fields[1], fields.size() > 2 ? detail::split_ids(fields[2]) : std::vector<std::string>{}});
                break;
            }
            case Section::qa: {
                if (fields.size() < 4 || fields[0].empty() || fields[1].empty() || fields[2].empty() ||
                    fields[3].empty()) {
                    frags.reports.push_back({line_no, raw, "qa line needs 'id | verb | question | answer | entities'"});
                    break;
                }
                QaPair qa;
                qa.id = fields[0];
                qa.verb_id = fields[1];
                qa.question = fields[2];
                qa.answer_text = fields[3];
                if (fields.size() > 4) qa.answer_entity_ids = detail::split_ids(fields[4]);
                frags.qa_pairs.push_back(std::move(qa));
                break;
            }
        }
    }
    if (frags.entities.empty() && frags.verbs.empty() && frags.qa_pairs.empty())
        throw ParseError("no recoverable workspace structures in model output");
    return frags;
}

// Renders a workspace back into the model output grammar; used for the
// second-pass refinement prompt and for fixture authoring.
inline std::string render_workspace_block(const Workspace& ws) {
    std::ostringstream out;
    out << "ENTITIES\n";
    for (const auto& e : ws.entities) {
        out << e.id << " | " << e.surface;
        for (const auto& r : e.roles) out << " | " << r.role << ": " << join(r.states, ", ");
        out << "\n";
    }
    out << "VERBS\n";
    for (const auto& v : ws.verbs) out << v.id << " | " << v.phrase << " | " << join(v.participant_ids, ", ") << "\n";
    out << "QA\n";
    for (const auto& q : ws.qa_pairs)
        out << q.id << " | " << q.verb_id << " | " << q.question << " | " << q.answer_text << " | "
            << join(q.answer_entity_ids, ", ") << "\n";
    return out.str();
}

namespace detail {

// Assembles fragments into a valid workspace: duplicate ids and records with
// unresolvable references are dropped and logged as repairs, annotations are
// copied from the answer entities.
inline Workspace assemble_workspace(const Document& doc, WorkspaceFragments frags, const std::string& model,
                                    int pass_count, const std::string& timestamp,
                                    std::vector<RepairEntry>* repairs) {
    auto log = [&](std::string action, std::string subject, std::string detail_text) {
        if (repairs) repairs->push_back({std::move(action), std::move(subject), std::move(detail_text)});
    };

    Workspace ws;
    ws.doc_id = doc.doc_id;
    ws.title = doc.title;
    ws.provenance = {model, pass_count, timestamp};

    std::set<std::string> entity_ids;
    for (auto& e : frags.entities) {
        if (trim(e.surface).empty()) {
            log("dropped-entity", e.id, "blank surface");
            continue;
        }
        if (!entity_ids.insert(e.id).second) {
            log("dropped-entity", e.id, "duplicate id");
            continue;
        }
        // merge duplicate role labels, keeping the first occurrence
        std::vector<RoleAnnotation> roles;
        std::set<std::string> seen_roles;
        for (auto& r : e.roles)
            if (seen_roles.insert(r.role).second) roles.push_back(std::move(r));
        e.roles = std::move(roles);
        ws.entities.push_back(std::move(e));
    }

    std::set<std::string> verb_ids;
    for (auto& v : frags.verbs) {
        if (!verb_ids.insert(v.id).second) {
            log("dropped-verb", v.id, "duplicate id");
            continue;
        }
        std::vector<std::string> participants;
        for (auto& p : v.participant_ids) {
            if (entity_ids.count(p))
                participants.push_back(p);
            else
                log("dropped-participant", v.id, "participant '" + p + "' unresolved");
        }
        v.participant_ids = std::move(participants);
        ws.verbs.push_back(std::move(v));
    }

    std::set<std::string> qa_ids;
    for (auto& q : frags.qa_pairs) {
        if (!qa_ids.insert(q.id).second) {
            log("dropped-qa", q.id, "duplicate id");
            continue;
        }
        if (!verb_ids.count(q.verb_id)) {
            log("dropped-qa", q.id, "verb '" + q.verb_id + "' unresolved");
            continue;
        }
        std::vector<std::string> answer_ids;
        for (auto& a : q.answer_entity_ids) {
            if (entity_ids.count(a))
                answer_ids.push_back(a);
            else
                log("dropped-answer-entity", q.id, "entity '" + a + "' unresolved");
        }
        q.answer_entity_ids = std::move(answer_ids);
        q.doc_id = doc.doc_id;
        q.annotations.clear();
        for (const auto& a : q.answer_entity_ids) {
            const EntityNode* e = ws.find_entity(a);
            for (const auto& r : e->roles) q.annotations.push_back(r);
        }
        ws.qa_pairs.push_back(std::move(q));
    }
    return ws;
}

inline ModelRequest extraction_request(const PromptStore& prompts, const std::string& template_id,
                                       const std::map<std::string, std::string>& vars, const ExtractionConfig& cfg,
                                       double temperature) {
    ModelRequest req;
    req.messages.push_back({"user", prompts.render(template_id, vars)});
    req.temperature = temperature;
    req.top_p = cfg.top_p;
    req.max_tokens = cfg.max_tokens;
    return req;
}

// One bounded repair: on parse failure the request is re-sent once with a
// corrective instruction appended; a second failure is final.
inline WorkspaceFragments call_and_parse(ModelClient& client, ModelRequest req) {
    ModelResponse resp = client.complete(req);
    try {
        return parse_model_output(resp.text);
    } catch (const ParseError&) {
        req.messages.push_back({"user",
                                "The previous output could not be parsed. Re-emit the full workspace using exactly "
                                "the ENTITIES / VERBS / QA sections and pipe-separated fields."});
        ModelResponse retry = client.complete(req);
        try {
            return parse_model_output(retry.text);
        } catch (const ParseError& e) {
            throw ExtractionError(std::string("model output unparseable after repair attempt: ") + e.what() +
                                  "; raw output: " + retry.text.substr(0, 200));
        }
    }
}

}  // namespace detail

inline Workspace extract_workspace(const Document& doc, ModelClient& client, const PromptStore& prompts,
                                   const ExtractionConfig& cfg, std::vector<RepairEntry>* repairs = nullptr) {
    if (trim(doc.text).empty()) throw ContractError("document '" + doc.doc_id + "' has empty text");
    prompts.require(cfg.prompt_template_id);

    auto req = detail::extraction_request(prompts, cfg.prompt_template_id, {{"title", doc.title}, {"text", doc.text}},
                                          cfg, cfg.temperature);
    auto frags = detail::call_and_parse(client, req);
    std::string ts = cfg.timestamp_override.empty() ? now_iso8601() : cfg.timestamp_override;
    Workspace ws = detail::assemble_workspace(doc, std::move(frags), client.name(), 1, ts, repairs);

    if (cfg.two_pass) {
        Workspace refined = refine_workspace(ws, doc, client, prompts, cfg, repairs);
        return refined;
    }
    return ws;
}

// Second-pass self-refinement: the model inspects the current workspace and
// repairs structural deficiencies. QA pairs that disappear across the pass
// are logged as repairs.
inline Workspace refine_workspace(const Workspace& ws, const Document& doc, ModelClient& client,
                                  const PromptStore& prompts, const ExtractionConfig& cfg,
                                  std::vector<RepairEntry>* repairs) {
    prompts.require(cfg.refine_template_id);
    auto req = detail::extraction_request(
        prompts, cfg.refine_template_id,
        {{"title", doc.title}, {"text", doc.text}, {"previous_gsw", render_workspace_block(ws)}}, cfg,
        cfg.refine_temperature);
    auto frags = detail::call_and_parse(client, req);
    std::string ts = cfg.timestamp_override.empty() ? now_iso8601() : cfg.timestamp_override;
    Workspace refined = detail::assemble_workspace(doc, std::move(frags), client.name(), 2, ts, repairs);

    // log corrections: input pairs that no longer exist (by question+answer)
    std::set<std::pair<std::string, std::string>> kept;
    for (const auto& q : refined.qa_pairs) kept.insert({normalize_light(q.question), normalize_light(q.answer_text)});
    for (const auto& q : ws.qa_pairs) {
        if (!kept.count({normalize_light(q.question), normalize_light(q.answer_text)})) {
            if (repairs) repairs->push_back({"removed-qa", q.id, "pair dropped by refinement: " + q.question});
        }
    }
    return refined;
}

}  // namespace gsw
