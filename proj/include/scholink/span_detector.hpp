#pragma once
// Span detection: (label, type) pairs produced from a question.
//
// Model output grammar:  label [type] | label [type] | ...
// with type one of person / publication (case-insensitive).

#include <algorithm>
#include <chrono>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/uchar.h>

#include "json.hpp"

#include "scholink/error.hpp"
#include "scholink/http_client.hpp"
#include "scholink/kg_store.hpp"
#include "scholink/label_index.hpp"
#include "scholink/text.hpp"

namespace scholink {

struct SpanPrediction {
    std::string label_text;
    EntityType etype;

    bool operator==(const SpanPrediction&) const = default;
};

inline std::vector<SpanPrediction> parse_model_output(std::string_view output) {
    std::vector<SpanPrediction> spans;
    if (text::trim(output).empty()) return spans;
    std::size_t start = 0;
    while (start <= output.size()) {
        std::size_t bar = output.find('|', start);
        std::size_t end = bar == std::string_view::npos ? output.size() : bar;
        const std::string seg = text::trim(output.substr(start, end - start));
        const std::size_t open = seg.rfind('[');
        if (seg.empty()) throw SpanParseError(start, "empty span");
        if (open == std::string::npos || seg.back() != ']')
            throw SpanParseError(start, "span lacks a bracketed type");
        const std::string label = text::trim(std::string_view(seg).substr(0, open));
        const std::string type = text::trim(std::string_view(seg).substr(open + 1, seg.size() - open - 2));
        if (label.empty()) throw SpanParseError(start, "span has an empty label");
        auto etype = EntityType::parse_canonical(type);
        if (!etype) throw SpanParseError(start + open, "unknown span type '" + type + "'");
        spans.push_back(SpanPrediction{label, *etype});
        if (bar == std::string_view::npos) break;
        start = bar + 1;
    }
    return spans;
}

inline std::string serialize_spans(const std::vector<SpanPrediction>& spans) {
    std::string out;
    for (const SpanPrediction& s : spans) {
        if (s.label_text.find_first_of("|[") != std::string::npos || text::trim(s.label_text).empty())
            throw LabelSyntaxError(s.label_text);
        if (!s.etype.is_canonical())
            throw UserError("invalid_span_type", "span type must be person or publication");
        if (!out.empty()) out += " | ";
        out += s.label_text + " [" + s.etype.name() + "]";
    }
    return out;
}

class SpanDetector {
public:
    virtual ~SpanDetector() = default;
    virtual std::vector<SpanPrediction> detect(std::string_view question) const = 0;
};

namespace span_detail {

struct QuotedSegment {
    std::size_t open;   // code-point offset of the opening quote
    std::size_t close;  // offset of the closing quote
};

inline char32_t closing_quote(char32_t c) {
    switch (c) {
        case U'\'': return U'\'';
        case U'"': return U'"';
        case U'‘': return U'’';
        case U'“': return U'”';
        default: return 0;
    }
}

inline bool alnum(char32_t c) { return u_isalnum(static_cast<UChar32>(c)) != 0; }

// Maximal quoted stretches. An opening quote may not follow a letter or
// digit and a closing quote may not precede one, so apostrophes inside
// words ("Vaswani's", "don't") are left alone.
inline std::vector<QuotedSegment> quoted_segments(const std::u32string& q) {
    std::vector<QuotedSegment> out;
    std::size_t i = 0;
    while (i < q.size()) {
        const char32_t close = closing_quote(q[i]);
        if (close == 0 || (i > 0 && alnum(q[i - 1]))) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        for (; j < q.size(); ++j)
            if (q[j] == close && j > i + 1 && (j + 1 == q.size() || !alnum(q[j + 1]))) break;
        if (j >= q.size()) {
            ++i;
            continue;
        }
        out.push_back({i, j});
        i = j + 1;
    }
    return out;
}

struct Token {
    std::size_t offset;
    std::u32string text;
};

inline std::vector<Token> tokens_in(const std::u32string& q, std::size_t begin, std::size_t end) {
    std::vector<Token> out;
    std::size_t i = begin;
    while (i < end) {
        while (i < end && u_isUWhiteSpace(static_cast<UChar32>(q[i]))) ++i;
        std::size_t j = i;
        while (j < end && !u_isUWhiteSpace(static_cast<UChar32>(q[j]))) ++j;
        if (j > i) out.push_back({i, q.substr(i, j - i)});
        i = j;
    }
    return out;
}

}  // namespace span_detail

// Dictionary fallback over the label index: quoted stretches become
// publication spans, then greedy longest match (6 down to 2 tokens) of
// indexed labels over the unquoted text.
class LexiconSpanDetector final : public SpanDetector {
public:
    static constexpr std::size_t kMaxNgram = 6;
    static constexpr std::size_t kMinNgram = 2;

    explicit LexiconSpanDetector(std::shared_ptr<const LabelIndex> index) : index_(std::move(index)) {
        if (!index_) throw ResourceMissing("label index");
    }

    std::vector<SpanPrediction> detect(std::string_view question) const override {
        using namespace span_detail;
        const std::u32string q = text::to_u32(question);
        std::vector<std::pair<std::size_t, SpanPrediction>> found;

        const auto quoted = quoted_segments(q);
        std::vector<std::pair<std::size_t, std::size_t>> plain;  // unquoted [begin, end)
        std::size_t cursor = 0;
        for (const auto& seg : quoted) {
            const std::string inner =
                text::trim(text::to_utf8(std::u32string_view(q).substr(seg.open + 1, seg.close - seg.open - 1)));
            if (!inner.empty()) found.push_back({seg.open, SpanPrediction{inner, EntityType::publication()}});
            plain.emplace_back(cursor, seg.open);
            cursor = seg.close + 1;
        }
        plain.emplace_back(cursor, q.size());

        for (const auto& [begin, end] : plain) {
            const auto toks = tokens_in(q, begin, end);
            std::size_t i = 0;
            while (i < toks.size()) {
                bool matched = false;
                for (std::size_t n = std::min(kMaxNgram, toks.size() - i); n >= kMinNgram; --n) {
                    std::u32string joined = toks[i].text;
                    for (std::size_t k = 1; k < n; ++k) joined += U' ' + toks[i + k].text;
                    auto hit = lookup(text::to_utf8(joined));
                    if (hit) {
                        found.push_back({toks[i].offset, std::move(*hit)});
                        i += n;
                        matched = true;
                        break;
                    }
                }
                if (!matched) ++i;
            }
        }
        std::stable_sort(found.begin(), found.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<SpanPrediction> out;
        out.reserve(found.size());
        for (auto& f : found) out.push_back(std::move(f.second));
        return out;
    }

private:
    std::optional<SpanPrediction> lookup(const std::string& raw) const {
        for (const std::string& candidate : {raw, text::strip_punct(raw)}) {
            const std::string norm = text::normalize(candidate);
            if (norm.empty()) continue;
            const auto* ids = index_->exact(norm);
            if (ids == nullptr) continue;
            for (std::uint32_t id : *ids) {
                const EntityType& t = index_->store().records()[index_->labels()[id].entity].etype;
                if (t.is_canonical()) return SpanPrediction{norm, t};
            }
        }
        return std::nullopt;
    }

    std::shared_ptr<const LabelIndex> index_;
};

inline std::vector<SpanPrediction> detect_lexicon(const std::shared_ptr<const LabelIndex>& index,
                                                  std::string_view question) {
    return LexiconSpanDetector(index).detect(question);
}

// Client for a sequence-to-sequence span model served over HTTP:
//   POST {"model": name, "question": q}  ->  200 {"output": "<grammar string>"}
class RemoteSpanDetector final : public SpanDetector {
public:
    RemoteSpanDetector(std::string endpoint, std::string model, std::chrono::milliseconds timeout)
        : endpoint_(std::move(endpoint)), model_(std::move(model)), timeout_(timeout) {
        if (!http::is_absolute_url(endpoint_))
            throw ConfigError("span endpoint '" + endpoint_ + "' is not an absolute URL");
    }

    const std::string& endpoint() const noexcept { return endpoint_; }
    const std::string& model() const noexcept { return model_; }

    std::vector<SpanPrediction> detect(std::string_view question) const override {
        const nlohmann::json reply =
            http::post_json(endpoint_, {{"model", model_}, {"question", std::string(question)}}, timeout_);
        if (!reply.is_object() || !reply.contains("output") || !reply["output"].is_string())
            throw SpanParseError(0, "reply lacks a string 'output'", reply.dump());
        const std::string raw = reply["output"].get<std::string>();
        try {
            return parse_model_output(raw);
        } catch (SpanParseError& e) {
            e.set_raw(raw);
            throw;
        }
    }

private:
    std::string endpoint_;
    std::string model_;
    std::chrono::milliseconds timeout_;
};

inline std::vector<SpanPrediction> detect_remote(const std::string& endpoint, const std::string& model,
                                                 std::string_view question,
                                                 std::chrono::milliseconds timeout = std::chrono::seconds(10)) {
    return RemoteSpanDetector(endpoint, model, timeout).detect(question);
}

}  // namespace scholink
