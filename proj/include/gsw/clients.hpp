#pragma once

// Chat-model client interface plus the deterministic offline backends used in
// tests and stub pipelines. Concrete hosted models are configuration, not
// types: anything speaking the OpenAI-style chat endpoint can sit behind
// HttpChatClient.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "gsw/core.hpp"

namespace gsw {

struct ChatMessage {
    std::string role;  // "system" | "user"
    std::string content;
};

struct ModelRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    double top_p = 1.0;
    int max_tokens = 4096;
};

struct ModelResponse {
    std::string text;
    long prompt_tokens = 0;
    long completion_tokens = 0;
};

// Whitespace-token approximation used by offline clients for usage reports.
// Counts are comparable only within one backend; reports record the method.
inline long approx_token_count(const std::string& text) {
    long n = 0;
    bool in_tok = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            in_tok = false;
        } else if (!in_tok) {
            in_tok = true;
            ++n;
        }
    }
    return n;
}

class ModelClient {
public:
    virtual ~ModelClient() = default;
    virtual std::string name() const = 0;
    virtual int max_output_tokens() const = 0;
    // whether complete() may be called from several threads at once
    virtual bool concurrent_safe() const = 0;
    virtual ModelResponse complete(const ModelRequest& req) = 0;
};

inline std::string request_text(const ModelRequest& req) {
    std::string flat;
    for (const auto& m : req.messages) {
        flat += m.role;
        flat += '\n';
        flat += m.content;
        flat += '\x1e';
    }
    return flat;
}

// ---------------------------------------------------------------------------
// StubModelClient: fixture table keyed by a digest of the rendered request.
// Identical requests always yield identical responses. Fixtures come either
// from add_response() or from a directory of <digest>.txt files.

class StubModelClient : public ModelClient {
public:
    explicit StubModelClient(std::string name = "stub") : name_(std::move(name)) {}

    static std::string digest(const ModelRequest& req) { return fnv1a64_hex(request_text(req)); }

    void add_response(const ModelRequest& req, const std::string& response) {
        fixtures_[digest(req)] = response;
    }
    void add_response_digest(const std::string& dig, const std::string& response) { fixtures_[dig] = response; }
    void set_fixture_dir(const std::string& dir) { fixture_dir_ = dir; }

    std::string name() const override { return name_; }
    int max_output_tokens() const override { return 8192; }
    bool concurrent_safe() const override { return true; }  // fixtures are fixed before use

    long call_count() const { return calls_.load(); }
    void reset_call_count() { calls_ = 0; }

    ModelResponse complete(const ModelRequest& req) override {
        calls_.fetch_add(1);
        std::string dig = digest(req);
        auto it = fixtures_.find(dig);
        std::string text;
        if (it != fixtures_.end()) {
            text = it->second;
        } else if (!fixture_dir_.empty()) {
            std::ifstream in(fixture_dir_ + "/" + dig + ".txt", std::ios::binary);
            if (!in) throw missing(dig, req);
            std::ostringstream ss;
            ss << in.rdbuf();
            text = ss.str();
        } else {
            throw missing(dig, req);
        }
        ModelResponse resp;
        resp.text = text;
        resp.prompt_tokens = approx_token_count(request_text(req));
        resp.completion_tokens = approx_token_count(text);
        return resp;
    }

private:
    Error missing(const std::string& dig, const ModelRequest& req) const {
        std::string head = req.messages.empty() ? "" : req.messages.back().content.substr(0, 80);
        return Error("stub '" + name_ + "': no fixture for digest " + dig + " (prompt head: " + head + ")");
    }

    std::string name_;
    std::map<std::string, std::string> fixtures_;
    std::string fixture_dir_;
    std::atomic<long> calls_{0};
};

// ---------------------------------------------------------------------------
// OverlapAnswerClient: rule-based extractive answerer for offline pipelines.
// It re-reads the evidence lines rendered into the prompt and answers with
// the line whose question best overlaps the user question. Evidence arrives
// ranked by chain confidence, so a gentle positional prior breaks overlap
// ties in favor of higher-ranked evidence. With no usable evidence it
// abstains.

class OverlapAnswerClient : public ModelClient {
public:
    std::string name() const override { return "overlap-answerer"; }
    int max_output_tokens() const override { return 256; }
    bool concurrent_safe() const override { return true; }

    ModelResponse complete(const ModelRequest& req) override {
        std::string prompt = request_text(req);
        std::string question = find_line_value(prompt, "Question:");
        auto qtokens = unique_tokens(question);

        double best = 0.0;
        std::string best_answer;
        int line_index = 0;
        std::istringstream in(prompt);
        std::string line;
        while (std::getline(in, line)) {
            auto qpos = line.find("Q: ");
            auto apos = line.find(" A: ");
            if (qpos == std::string::npos || apos == std::string::npos || apos < qpos) continue;
            int idx = line_index++;
            std::string q = line.substr(qpos + 3, apos - qpos - 3);
            std::string rest = line.substr(apos + 4);
            auto sep = rest.find(" | ");
            std::string a = sep == std::string::npos ? rest : rest.substr(0, sep);
            auto ltokens = unique_tokens(q);
            if (ltokens.empty()) continue;
            size_t inter = 0;
            for (const auto& [t, unused] : ltokens)
                if (qtokens.count(t)) ++inter;
            double ratio = static_cast<double>(inter) / static_cast<double>(ltokens.size());
            double weight = std::max(1.0 - 0.05 * idx, 0.1);
            double score = ratio * weight;
            if (score > best + 1e-12) {
                best = score;
                best_answer = trim(a);
            }
        }

        ModelResponse resp;
        std::string answer = (best > 0.0 && !best_answer.empty()) ? best_answer : "N/A";
        resp.text = "Answer: " + answer;
        resp.prompt_tokens = approx_token_count(prompt);
        resp.completion_tokens = approx_token_count(resp.text);
        return resp;
    }

private:
    static std::string find_line_value(const std::string& text, const std::string& key) {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            auto pos = line.find(key);
            if (pos != std::string::npos) return trim(line.substr(pos + key.size()));
        }
        return "";
    }
    static std::map<std::string, int> unique_tokens(const std::string& text) {
        std::map<std::string, int> out;
        std::string cur;
        auto flush = [&] {
            if (!cur.empty()) out[cur] = 1;
            cur.clear();
        };
        for (unsigned char c : text) {
            if (std::isalnum(c) || c >= 0x80)
                cur.push_back(static_cast<char>(std::tolower(c)));
            else
                flush();
        }
        flush();
        return out;
    }
};

}  // namespace gsw
