#pragma once
// Reranker training records: (question, positive uri, negative uri) lines,
// resolved against the store, KG embeddings and text encoder at load time.

#include <istream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "scholink/dataset.hpp"
#include "scholink/error.hpp"
#include "scholink/kg_embed.hpp"
#include "scholink/label_index.hpp"
#include "scholink/reranker.hpp"
#include "scholink/text_encoder.hpp"

namespace scholink {

struct RerankRecord {
    std::string question;
    std::string positive;
    std::string negative;

    bool operator==(const RerankRecord&) const = default;
};

// Tab-separated, one record per line. Tabs and newlines inside a question
// are replaced by spaces on write.
inline void write_rerank_tsv(const std::vector<RerankRecord>& records, std::ostream& out) {
    for (const auto& r : records) {
        std::string q = r.question;
        for (char& c : q)
            if (c == '\t' || c == '\n' || c == '\r') c = ' ';
        out << q << '\t' << r.positive << '\t' << r.negative << '\n';
    }
}

inline std::vector<RerankRecord> read_rerank_tsv(std::istream& in) {
    std::vector<RerankRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty() || line.front() == '#') continue;
        const std::size_t a = line.find('\t');
        const std::size_t b = a == std::string::npos ? a : line.find('\t', a + 1);
        if (b == std::string::npos || line.find('\t', b + 1) != std::string::npos)
            throw ParseError(lineno, "expected question<TAB>positive<TAB>negative");
        RerankRecord r{line.substr(0, a), line.substr(a + 1, b - a - 1), line.substr(b + 1)};
        if (text::trim(r.question).empty() || r.positive.empty() || r.negative.empty())
            throw ParseError(lineno, "empty field");
        out.push_back(std::move(r));
    }
    return out;
}

struct TrainingDataOptions {
    NegativePolicy policy = NegativePolicy::HardThenRandom;
    std::size_t negatives_per_positive = 3;
    std::size_t candidate_k = 10;
    std::uint64_t seed = 7;
};

// One record per (question, gold entity, negative). Hard negatives are the
// other candidates the index returns for the gold entity's label; when none
// exist, or under the Random policy, negatives are drawn uniformly from the
// store. Gold entities absent from the store are skipped.
inline std::vector<RerankRecord> make_training_records(const std::vector<GoldQuestion>& dataset,
                                                       const LabelIndex& index,
                                                       const TrainingDataOptions& opt = {}) {
    const EntityStore& store = index.store();
    if (store.size() < 2) throw EmptyStore();
    std::mt19937_64 rng(opt.seed);
    std::vector<RerankRecord> out;
    for (const GoldQuestion& q : dataset) {
        for (const std::string& gold : q.gold_entities) {
            const EntityRecord* rec = store.find(gold);
            if (rec == nullptr) continue;
            std::vector<std::string> negatives;
            if (opt.policy == NegativePolicy::HardThenRandom) {
                for (const Candidate& c : index.search(rec->label, std::nullopt, opt.candidate_k)) {
                    if (negatives.size() >= opt.negatives_per_positive) break;
                    if (c.uri != gold && !q.gold_entities.contains(c.uri)) negatives.push_back(c.uri);
                }
            }
            while (negatives.size() < opt.negatives_per_positive) {
                const std::string& uri = store.records()[embed::uniform_index(rng, store.size())].uri;
                if (uri == gold) continue;
                negatives.push_back(uri);
            }
            for (auto& n : negatives) out.push_back({q.question, gold, std::move(n)});
        }
    }
    if (out.empty()) throw EmptyDataset();
    return out;
}

// Feature vector of an entity as the pipeline builds it: primary label
// embedding, KG vector (zeros when the entity has none) and the label's
// similarity to `target`.
inline FeatureVector969 entity_features(const EntityRecord& e, const TextEmbedding768& label_embedding,
                                        const KgEmbeddingSet& kg, std::string_view target) {
    static const std::vector<double> zeros(kKgDim, 0.0);
    auto vec = kg.entity(e.uri);
    return compose_entity(label_embedding, vec ? *vec : std::span<const double>(zeros),
                          string_similarity(e.label, target));
}

inline std::vector<TripletExample> build_triplets(const std::vector<RerankRecord>& records,
                                                  const EntityStore& store, const KgEmbeddingSet& kg,
                                                  const TextEncoder& encoder) {
    if (kg.dim != kKgDim) throw DimensionMismatch(kKgDim, kg.dim);
    std::vector<TripletExample> out;
    out.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const RerankRecord& r = records[i];
        const EntityRecord* pos = store.find(r.positive);
        const EntityRecord* neg = store.find(r.negative);
        if (pos == nullptr) throw ParseError(i + 1, "unknown positive entity " + r.positive);
        if (neg == nullptr) throw ParseError(i + 1, "unknown negative entity " + r.negative);
        const auto enc = encoder.batch_encode({r.question, pos->label, neg->label});
        out.push_back(TripletExample{compose_question(enc[0]), entity_features(*pos, enc[1], kg, r.question),
                                     entity_features(*neg, enc[2], kg, r.question)});
    }
    return out;
}

}  // namespace scholink
