#pragma once
// 768-dimensional text embeddings behind one interface.
//
// HashEncoder is a deterministic feature-hashing stand-in: every whitespace
// token and every padded character trigram of the normalized text is hashed
// (FNV-1a 64) into one of 768 buckets with a +/-1 sign taken from the hash's
// low bit; the sum is L2-normalized.
//
// RemoteEncoder delegates to a service speaking
//   POST {"texts": [...]}  ->  200 {"vectors": [[768 reals], ...]}

#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "scholink/error.hpp"
#include "scholink/http_client.hpp"
#include "scholink/text.hpp"

namespace scholink {

inline constexpr std::size_t kTextDim = 768;

class TextEmbedding768 {
public:
    TextEmbedding768() : values_(kTextDim, 0.0) {}

    explicit TextEmbedding768(std::vector<double> values) : values_(std::move(values)) {
        if (values_.size() != kTextDim)
            throw BadRemoteVector("text embedding has length " + std::to_string(values_.size()) +
                                  ", expected 768");
        for (double v : values_)
            if (!std::isfinite(v)) throw BadRemoteVector("text embedding has a non-finite component");
    }

    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    bool operator==(const TextEmbedding768&) const = default;

private:
    std::vector<double> values_;
};

class TextEncoder {
public:
    virtual ~TextEncoder() = default;
    virtual std::string name() const = 0;
    virtual TextEmbedding768 encode(std::string_view text) const = 0;
    virtual std::vector<TextEmbedding768> batch_encode(const std::vector<std::string>& texts) const = 0;

protected:
    static void require_non_empty(const std::vector<std::string>& texts) {
        for (std::size_t i = 0; i < texts.size(); ++i)
            if (text::normalize(texts[i]).empty()) throw EmptyText(i);
    }
};

class HashEncoder final : public TextEncoder {
public:
    std::string name() const override { return "hash"; }

    TextEmbedding768 encode(std::string_view input) const override {
        const std::string norm = text::normalize(input);
        if (norm.empty()) throw EmptyText();
        std::vector<double> v(kTextDim, 0.0);
        auto add = [&](std::string_view tag, std::string_view feature) {
            std::string key(tag);
            key.push_back('\x1f');
            key.append(feature);
            const std::uint64_t h = text::fnv1a64(key);
            v[(h >> 1) % kTextDim] += (h & 1ULL) ? 1.0 : -1.0;
        };
        for (const auto& tok : text::split_whitespace(norm)) add("w", tok);

        std::u32string padded = U"##" + text::to_u32(norm) + U"##";
        for (std::size_t i = 0; i + 3 <= padded.size(); ++i)
            add("g", text::to_utf8(std::u32string_view(padded).substr(i, 3)));

        double norm2 = 0.0;
        for (double x : v) norm2 += x * x;
        if (norm2 == 0.0) {
            // Every feature cancelled; fall back to one bucket for the whole string.
            v[(text::fnv1a64(norm) >> 1) % kTextDim] = 1.0;
            norm2 = 1.0;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& x : v) x *= inv;
        return TextEmbedding768(std::move(v));
    }

    std::vector<TextEmbedding768> batch_encode(const std::vector<std::string>& texts) const override {
        require_non_empty(texts);
        std::vector<TextEmbedding768> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(encode(t));
        return out;
    }
};

inline constexpr const char* kEncoderEndpointEnv = "SCHOLINK_ENCODER_ENDPOINT";

class RemoteEncoder final : public TextEncoder {
public:
    RemoteEncoder(std::string endpoint, std::chrono::milliseconds timeout)
        : endpoint_(std::move(endpoint)), timeout_(timeout) {
        if (!http::is_absolute_url(endpoint_))
            throw ConfigError("remote encoder endpoint '" + endpoint_ + "' is not an absolute URL");
    }

    // Endpoint from SCHOLINK_ENCODER_ENDPOINT.
    static RemoteEncoder from_env(std::chrono::milliseconds timeout) {
        const char* env = std::getenv(kEncoderEndpointEnv);
        if (env == nullptr || *env == '\0')
            throw ConfigError(std::string(kEncoderEndpointEnv) + " is not set");
        return RemoteEncoder(env, timeout);
    }

    std::string name() const override { return "remote"; }
    const std::string& endpoint() const noexcept { return endpoint_; }

    TextEmbedding768 encode(std::string_view text) const override {
        if (text::normalize(text).empty()) throw EmptyText();
        return batch_encode({std::string(text)}).front();
    }

    std::vector<TextEmbedding768> batch_encode(const std::vector<std::string>& texts) const override {
        require_non_empty(texts);
        if (texts.empty()) return {};
        nlohmann::json reply = http::post_json(endpoint_, {{"texts", texts}}, timeout_);
        if (!reply.is_object() || !reply.contains("vectors") || !reply["vectors"].is_array())
            throw BadRemoteVector("reply lacks a 'vectors' array");
        const auto& vecs = reply["vectors"];
        if (vecs.size() != texts.size())
            throw BadRemoteVector("reply has " + std::to_string(vecs.size()) + " vectors for " +
                                  std::to_string(texts.size()) + " texts");
        std::vector<TextEmbedding768> out;
        out.reserve(vecs.size());
        for (std::size_t i = 0; i < vecs.size(); ++i) {
            if (!vecs[i].is_array()) throw BadRemoteVector("vector " + std::to_string(i) + " is not an array");
            std::vector<double> v;
            v.reserve(vecs[i].size());
            for (const auto& x : vecs[i]) {
                if (!x.is_number()) throw BadRemoteVector("vector " + std::to_string(i) + " has a non-number");
                v.push_back(x.get<double>());
            }
            out.emplace_back(std::move(v));
        }
        return out;
    }

private:
    std::string endpoint_;
    std::chrono::milliseconds timeout_;
};

}  // namespace scholink
