#pragma once

// Hosted-model backends speaking the common JSON APIs: chat completions for
// extraction/decomposition/answering, an embeddings endpoint, and a rerank
// endpoint. Plain-HTTP endpoints (local inference servers or gateways); every
// call uses a fresh connection so instances are safe to share across threads.

#include <memory>
#include <string>
#include <vector>

#include "httplib.h"

#include "gsw/clients.hpp"
#include "gsw/core.hpp"
#include "gsw/embedder.hpp"
#include "gsw/reranker.hpp"

namespace gsw {

namespace detail {

inline std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    // "http://host:port/base" -> ("http://host:port", "/base")
    auto scheme = endpoint.find("://");
    if (scheme == std::string::npos) throw ConfigError("endpoint '" + endpoint + "' needs a scheme");
    auto slash = endpoint.find('/', scheme + 3);
    if (slash == std::string::npos) return {endpoint, ""};
    return {endpoint.substr(0, slash), endpoint.substr(slash)};
}

inline json post_json(const std::string& endpoint, const std::string& path, const json& body,
                      const std::string& api_key, int max_retries) {
    auto [host, base] = split_endpoint(endpoint);
    std::string last_error;
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        httplib::Client client(host);
        client.set_read_timeout(120, 0);
        httplib::Headers headers;
        if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
        auto res = client.Post((base + path).c_str(), headers, body.dump(), "application/json");
        if (res && res->status == 200) {
            try {
                return json::parse(res->body);
            } catch (const json::exception& e) {
                last_error = std::string("invalid JSON body: ") + e.what();
                continue;
            }
        }
        last_error = res ? ("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200))
                         : ("transport: " + httplib::to_string(res.error()));
    }
    throw IoError("POST " + endpoint + path + " failed after " + std::to_string(max_retries + 1) + " attempts: " +
                  last_error);
}

}  // namespace detail

class HttpChatClient : public ModelClient {
public:
    HttpChatClient(std::string endpoint, std::string model, std::string api_key = "", int max_retries = 2)
        : endpoint_(std::move(endpoint)), model_(std::move(model)), api_key_(std::move(api_key)),
          max_retries_(max_retries) {}

    std::string name() const override { return model_; }
    int max_output_tokens() const override { return 8192; }
    bool concurrent_safe() const override { return true; }

    ModelResponse complete(const ModelRequest& req) override {
        json messages = json::array();
        for (const auto& m : req.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
        json body = {{"model", model_},
                     {"messages", messages},
                     {"temperature", req.temperature},
                     {"top_p", req.top_p},
                     {"max_tokens", req.max_tokens}};
        json resp = detail::post_json(endpoint_, "/chat/completions", body, api_key_, max_retries_);
        ModelResponse out;
        try {
            out.text = resp.at("choices").at(0).at("message").at("content").get<std::string>();
            if (resp.contains("usage")) {
                out.prompt_tokens = resp["usage"].value("prompt_tokens", 0);
                out.completion_tokens = resp["usage"].value("completion_tokens", 0);
            }
        } catch (const json::exception& e) {
            throw IoError(std::string("unexpected chat response shape: ") + e.what());
        }
        return out;
    }

private:
    std::string endpoint_, model_, api_key_;
    int max_retries_;
};

class HttpEmbedder : public Embedder {
public:
    HttpEmbedder(std::string endpoint, std::string model, int dimension, std::string api_key = "",
                 int max_retries = 2)
        : endpoint_(std::move(endpoint)), model_(std::move(model)), dim_(dimension), api_key_(std::move(api_key)),
          max_retries_(max_retries) {
        if (dim_ <= 0) throw ConfigError("embedder dimension must be positive");
    }

    std::string name() const override { return model_; }
    int dimension() const override { return dim_; }

    std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override {
        json body = {{"model", model_}, {"input", texts}};
        json resp = detail::post_json(endpoint_, "/embeddings", body, api_key_, max_retries_);
        std::vector<std::vector<float>> out;
        try {
            for (const auto& item : resp.at("data")) out.push_back(item.at("embedding").get<std::vector<float>>());
        } catch (const json::exception& e) {
            throw IoError(std::string("unexpected embeddings response shape: ") + e.what());
        }
        if (out.size() != texts.size())
            throw IoError("embeddings endpoint returned " + std::to_string(out.size()) + " vectors for " +
                          std::to_string(texts.size()) + " inputs");
        return out;
    }

private:
    std::string endpoint_, model_;
    int dim_;
    std::string api_key_;
    int max_retries_;
};

class HttpReranker : public Reranker {
public:
    HttpReranker(std::string endpoint, std::string model, std::string api_key = "", int max_retries = 2)
        : endpoint_(std::move(endpoint)), model_(std::move(model)), api_key_(std::move(api_key)),
          max_retries_(max_retries) {}

    std::string name() const override { return model_; }

    std::vector<double> score(const std::string& query, const std::vector<std::string>& candidates) override {
        json body = {{"model", model_}, {"query", query}, {"documents", candidates}};
        json resp = detail::post_json(endpoint_, "/rerank", body, api_key_, max_retries_);
        std::vector<double> out(candidates.size(), 0.0);
        try {
            for (const auto& item : resp.at("results")) {
                size_t index = item.at("index").get<size_t>();
                if (index < out.size()) out[index] = item.at("relevance_score").get<double>();
            }
        } catch (const json::exception& e) {
            throw IoError(std::string("unexpected rerank response shape: ") + e.what());
        }
        return out;
    }

private:
    std::string endpoint_, model_, api_key_;
    int max_retries_;
};

}  // namespace gsw
