#pragma once
// Entity-linking pipeline: span detection -> candidate generation ->
// (conditional) Siamese disambiguation.
//
// Modes:
//   LabelSorting               candidates in lexical order, distance = 1 - lexical_score
//   ConditionalDisambiguation  re-rank only when the duplicate-label trigger fires
//   HardDisambiguation         always re-rank by cosine distance

#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "scholink/error.hpp"
#include "scholink/kg_embed.hpp"
#include "scholink/kg_store.hpp"
#include "scholink/label_index.hpp"
#include "scholink/reranker.hpp"
#include "scholink/span_detector.hpp"
#include "scholink/text_encoder.hpp"

namespace scholink {

enum class LinkMode { LabelSorting, ConditionalDisambiguation, HardDisambiguation };

inline constexpr LinkMode kLinkModes[] = {LinkMode::LabelSorting, LinkMode::ConditionalDisambiguation,
                                          LinkMode::HardDisambiguation};

inline std::string to_string(LinkMode m) {
    switch (m) {
        case LinkMode::LabelSorting: return "label_sorting";
        case LinkMode::ConditionalDisambiguation: return "conditional";
        case LinkMode::HardDisambiguation: return "hard";
    }
    return "?";
}

inline std::optional<LinkMode> parse_link_mode(std::string_view s) {
    std::string l = text::normalize(s);
    std::replace(l.begin(), l.end(), '-', '_');
    if (l == "label_sorting" || l == "labelsort" || l == "label") return LinkMode::LabelSorting;
    if (l == "conditional" || l == "conditional_disambiguation") return LinkMode::ConditionalDisambiguation;
    if (l == "hard" || l == "hard_disambiguation") return LinkMode::HardDisambiguation;
    return std::nullopt;
}

// Which duplicate-label test opens the disambiguation stage.
enum class TriggerRule {
    TopCandidate,  // the top candidate shares its label with another candidate
    AnyPair,       // any two candidates share a label
};

// What the entity label is compared against for the similarity feature.
enum class SimilarityTarget { Question, Span };

struct LinkOptions {
    TriggerRule trigger = TriggerRule::TopCandidate;
    SimilarityTarget similarity = SimilarityTarget::Question;
};

using SpanModelId = std::string;

struct LinkRequest {
    std::string question;
    SpanModelId span_model;
    EmbeddingKind embedding = EmbeddingKind::TransE;
    LinkMode mode = LinkMode::ConditionalDisambiguation;
    std::size_t k = 10;

    bool operator==(const LinkRequest&) const = default;
};

enum class Scorer { Lexical, SiameseCosine };

inline std::string to_string(Scorer s) {
    return s == Scorer::Lexical ? "lexical" : "siamese_cosine";
}

struct StageError {
    std::string code;
    std::string message;
    bool operator==(const StageError&) const = default;
};

struct SpanResult {
    SpanPrediction span;
    std::optional<RankedEntity> top;
    std::vector<RankedEntity> ranked;
    bool disambiguation_ran = false;
    Scorer scorer = Scorer::Lexical;
    std::optional<StageError> error;

    bool operator==(const SpanResult&) const = default;
};

struct LinkResult {
    LinkRequest request;
    std::vector<SpanResult> spans;
    std::optional<StageError> error;  // detector failure; spans is then empty
    double elapsed_ms = 0.0;

    bool has_errors() const {
        if (error) return true;
        for (const auto& s : spans)
            if (s.error) return true;
        return false;
    }
};

struct Resources {
    std::shared_ptr<const LabelIndex> index;
    std::map<EmbeddingKind, std::shared_ptr<const KgEmbeddingSet>> embeddings;
    std::map<EmbeddingKind, std::shared_ptr<const SiameseParams>> rerankers;
    std::shared_ptr<const TextEncoder> encoder;
    std::vector<std::pair<SpanModelId, std::shared_ptr<const SpanDetector>>> detectors;
    LinkOptions options;

    const SpanDetector* detector(std::string_view id) const {
        for (const auto& [name, d] : detectors)
            if (name == id) return d.get();
        return nullptr;
    }

    std::vector<EmbeddingKind> loaded_embeddings() const {
        std::vector<EmbeddingKind> out;
        for (EmbeddingKind k : kEmbeddingKinds)
            if (embeddings.contains(k) && rerankers.contains(k)) out.push_back(k);
        return out;
    }
};

// Cross product of configured detectors (config order) and loaded
// embedding kinds (TransE, ComplEx, DistMult order).
inline std::vector<std::pair<SpanModelId, EmbeddingKind>> available_combinations(
    const std::vector<SpanModelId>& detectors, const std::vector<EmbeddingKind>& embeddings) {
    std::vector<std::pair<SpanModelId, EmbeddingKind>> out;
    for (const auto& d : detectors)
        for (EmbeddingKind k : kEmbeddingKinds)
            if (std::find(embeddings.begin(), embeddings.end(), k) != embeddings.end()) out.emplace_back(d, k);
    return out;
}

inline std::vector<std::pair<SpanModelId, EmbeddingKind>> available_combinations(const Resources& res) {
    std::vector<SpanModelId> ids;
    for (const auto& d : res.detectors) ids.push_back(d.first);
    return available_combinations(ids, res.loaded_embeddings());
}

namespace pipeline_detail {

inline std::vector<RankedEntity> lexical_ranking(const std::vector<Candidate>& candidates) {
    std::vector<RankedEntity> out;
    out.reserve(candidates.size());
    for (const Candidate& c : candidates)
        out.push_back(RankedEntity{c.uri, c.matched_label, c.etype, 1.0 - c.lexical_score});
    return out;
}

inline std::vector<RankedEntity> siamese_ranking(const LinkRequest& req, const SpanPrediction& span,
                                                 const std::vector<Candidate>& candidates,
                                                 const Resources& res) {
    const KgEmbeddingSet& kg = *res.embeddings.at(req.embedding);
    const SiameseParams& params = *res.rerankers.at(req.embedding);
    const EntityStore& store = res.index->store();

    std::vector<std::string> texts{req.question};
    texts.reserve(candidates.size() + 1);
    for (const Candidate& c : candidates) texts.push_back(store.find(c.uri)->label);
    const std::vector<TextEmbedding768> encoded = res.encoder->batch_encode(texts);

    const std::string& sim_target =
        res.options.similarity == SimilarityTarget::Question ? req.question : span.label_text;
    const std::vector<double> zero_kg(kKgDim, 0.0);
    std::vector<std::pair<Candidate, FeatureVector969>> pairs;
    pairs.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const std::string& label = texts[i + 1];
        auto vec = kg.entity(candidates[i].uri);
        const std::span<const double> kg_vec = vec ? *vec : std::span<const double>(zero_kg);
        pairs.emplace_back(candidates[i],
                           compose_entity(encoded[i + 1], kg_vec, string_similarity(label, sim_target)));
    }
    return rank(params, compose_question(encoded[0]), pairs);
}

}  // namespace pipeline_detail

inline LinkResult link(const LinkRequest& req, const Resources& res) {
    const auto started = std::chrono::steady_clock::now();
    if (text::normalize(req.question).empty()) throw UserError("empty_question", "question is empty");
    if (req.k == 0) throw InvalidK();
    if (!res.index) throw ResourceMissing("label index");
    const SpanDetector* detector = res.detector(req.span_model);
    if (detector == nullptr) throw ResourceMissing("span model '" + req.span_model + "'");
    if (req.mode != LinkMode::LabelSorting) {
        if (!res.embeddings.contains(req.embedding))
            throw ResourceMissing(to_string(req.embedding) + " embeddings");
        if (!res.rerankers.contains(req.embedding))
            throw ResourceMissing(to_string(req.embedding) + " reranker");
        if (!res.encoder) throw ResourceMissing("text encoder");
    }

    LinkResult result;
    result.request = req;
    std::vector<SpanPrediction> spans;
    try {
        spans = detector->detect(req.question);
    } catch (const RemoteUnavailable& e) {
        result.error = StageError{e.code(), e.what()};
    } catch (const SpanParseError& e) {
        result.error = StageError{e.code(), e.what()};
    }

    for (const SpanPrediction& span : spans) {
        SpanResult sr;
        sr.span = span;
        try {
            const std::vector<Candidate> candidates = res.index->search(span.label_text, span.etype, req.k);
            bool rerank = false;
            if (!candidates.empty()) {
                if (req.mode == LinkMode::HardDisambiguation) rerank = true;
                if (req.mode == LinkMode::ConditionalDisambiguation)
                    rerank = res.options.trigger == TriggerRule::TopCandidate
                                 ? duplicate_label_exists(candidates)
                                 : any_duplicate_label(candidates);
            }
            if (rerank) {
                sr.ranked = pipeline_detail::siamese_ranking(req, span, candidates, res);
                sr.scorer = Scorer::SiameseCosine;
                sr.disambiguation_ran = true;
            } else {
                sr.ranked = pipeline_detail::lexical_ranking(candidates);
            }
        } catch (const RemoteUnavailable& e) {
            sr.ranked.clear();
            sr.error = StageError{e.code(), e.what()};
        } catch (const BadRemoteVector& e) {
            sr.ranked.clear();
            sr.error = StageError{e.code(), e.what()};
        } catch (const EmptyQuery& e) {
            sr.error = StageError{e.code(), e.what()};
        }
        if (sr.ranked.size() > req.k) sr.ranked.resize(req.k);
        if (!sr.ranked.empty()) sr.top = sr.ranked.front();
        result.spans.push_back(std::move(sr));
    }
    result.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return result;
}

// Distances are rounded to 6 fractional digits on the wire.
inline double wire_distance(double d) { return std::round(d * 1e6) / 1e6; }

inline nlohmann::json to_json(const RankedEntity& e) {
    return {{"uri", e.uri},           {"label", e.matched_label},
            {"type", e.etype.name()}, {"distance", wire_distance(e.distance)},
            {"url", e.uri}};
}

inline nlohmann::json to_json(const StageError& e) {
    return {{"code", e.code}, {"message", e.message}};
}

inline nlohmann::json to_json(const LinkResult& r, bool include_timing = false) {
    nlohmann::json spans = nlohmann::json::array();
    for (const SpanResult& s : r.spans) {
        nlohmann::json ranked = nlohmann::json::array();
        for (const auto& e : s.ranked) ranked.push_back(to_json(e));
        nlohmann::json js = {
            {"span", {{"label", s.span.label_text}, {"type", s.span.etype.name()}}},
            {"top", s.top ? to_json(*s.top) : nlohmann::json(nullptr)},
            {"ranked", std::move(ranked)},
            {"disambiguation_ran", s.disambiguation_ran},
            {"scorer", to_string(s.scorer)},
        };
        if (s.error) js["error"] = to_json(*s.error);
        spans.push_back(std::move(js));
    }
    nlohmann::json out = {
        {"request",
         {{"question", r.request.question},
          {"span_model", r.request.span_model},
          {"embedding", to_string(r.request.embedding)},
          {"mode", to_string(r.request.mode)},
          {"k", r.request.k}}},
        {"spans", std::move(spans)},
    };
    if (r.error) out["error"] = to_json(*r.error);
    if (include_timing) out["elapsed_ms"] = r.elapsed_ms;
    return out;
}

}  // namespace scholink
