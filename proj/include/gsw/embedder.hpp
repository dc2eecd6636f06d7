#pragma once

// Text embedding interface. The hashed bag-of-tokens embedder gives the
// offline pipeline deterministic vectors with meaningful lexical-overlap
// geometry; hosted encoders are configuration behind the same interface.

#include <cmath>
#include <string>
#include <vector>

#include "gsw/core.hpp"

namespace gsw {

// lowercase, split on non-alphanumerics, no stemming, no stopword removal
// (entity surfaces are short and names must survive intact)
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) tokens.push_back(cur);
        cur.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80)
            cur.push_back(static_cast<char>(std::tolower(c)));
        else
            flush();
    }
    flush();
    return tokens;
}

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::string name() const = 0;
    virtual int dimension() const = 0;
    virtual std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) = 0;

    std::vector<float> embed_one(const std::string& text) { return embed({text}).front(); }
};

class HashedEmbedder : public Embedder {
public:
    explicit HashedEmbedder(int dim = 64) : dim_(dim) {
        if (dim_ <= 0) throw ConfigError("embedder dimension must be positive");
    }

    std::string name() const override { return "hashed-bow-" + std::to_string(dim_); }
    int dimension() const override { return dim_; }

    std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override {
        std::vector<std::vector<float>> out;
        out.reserve(texts.size());
        for (const auto& text : texts) {
            std::vector<float> v(static_cast<size_t>(dim_), 0.0f);
            for (const auto& tok : tokenize(text)) {
                uint64_t h = fnv1a64(tok);
                size_t bucket = static_cast<size_t>(h % static_cast<uint64_t>(dim_));
                // sign bit decorrelates colliding tokens
                float sign = (h >> 63) ? -1.0f : 1.0f;
                v[bucket] += sign;
            }
            double norm = 0.0;
            for (float x : v) norm += static_cast<double>(x) * x;
            if (norm > 0.0) {
                float inv = static_cast<float>(1.0 / std::sqrt(norm));
                for (float& x : v) x *= inv;
            }
            out.push_back(std::move(v));
        }
        return out;
    }

private:
    int dim_;
};

}  // namespace gsw
