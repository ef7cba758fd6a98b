#pragma once
// Candidate generation: a fuzzy trigram index over every entity label.
//
// lexical_score = 0.75 * J + 0.25 * L, where J is the Jaccard overlap of
// "##"-padded character trigram sets and L = 1 - levenshtein / max length,
// both over normalized text. Ranking is (score desc, L desc, uri asc); one
// candidate per entity, represented by its best label.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scholink/binary_io.hpp"
#include "scholink/error.hpp"
#include "scholink/kg_store.hpp"
#include "scholink/text.hpp"

namespace scholink {

struct Candidate {
    std::string uri;
    std::string matched_label;
    EntityType etype;
    double lexical_score = 0.0;
    double label_similarity = 0.0;  // the L component, kept for tie-breaking

    bool operator==(const Candidate&) const = default;
};

inline constexpr double kTrigramWeight = 0.75;
inline constexpr double kEditWeight = 0.25;

inline double lexical_score(double jaccard, double edit_similarity) {
    return kTrigramWeight * jaccard + kEditWeight * edit_similarity;
}

struct IndexedLabel {
    std::uint32_t entity = 0;   // position in store.records()
    std::uint32_t ordinal = 0;  // 0 = primary label, then aliases in order
    std::string normalized;
    std::uint32_t trigram_count = 0;

    bool operator==(const IndexedLabel&) const = default;
};

class LabelIndex {
public:
    using Postings = std::map<std::u32string, std::vector<std::uint32_t>>;

    LabelIndex() = default;

    explicit LabelIndex(std::shared_ptr<const EntityStore> store) : store_(std::move(store)) {
        if (!store_ || store_->empty()) throw EmptyStore();
        const auto& recs = store_->records();
        for (std::uint32_t e = 0; e < recs.size(); ++e) {
            add_label(e, 0, recs[e].label);
            for (std::uint32_t a = 0; a < recs[e].aliases.size(); ++a)
                add_label(e, a + 1, recs[e].aliases[a]);
        }
        finish();
    }

    const EntityStore& store() const { return *store_; }
    std::shared_ptr<const EntityStore> store_ptr() const { return store_; }
    const std::vector<IndexedLabel>& labels() const noexcept { return labels_; }
    const Postings& postings() const noexcept { return postings_; }

    const std::string& label_text(const IndexedLabel& l) const {
        const EntityRecord& r = store_->records()[l.entity];
        return l.ordinal == 0 ? r.label : r.aliases[l.ordinal - 1];
    }

    // Label ids whose normalized text equals `normalized` exactly.
    const std::vector<std::uint32_t>* exact(std::string_view normalized) const {
        auto it = by_text_.find(std::string(normalized));
        return it == by_text_.end() ? nullptr : &it->second;
    }

    std::size_t max_label_tokens() const noexcept { return max_tokens_; }

    std::vector<Candidate> search(std::string_view query_label,
                                  const std::optional<EntityType>& type_filter,
                                  std::size_t k) const {
        if (k == 0) throw InvalidK();
        std::string q = text::normalize(query_label);
        if (q.empty()) throw EmptyQuery();
        std::u32string qcps = text::to_u32(q);
        std::vector<std::u32string> qgrams = text::padded_trigrams(qcps);

        std::unordered_map<std::uint32_t, std::uint32_t> overlap;
        for (const auto& g : qgrams) {
            auto it = postings_.find(g);
            if (it == postings_.end()) continue;
            for (std::uint32_t id : it->second) ++overlap[id];
        }

        const auto& recs = store_->records();
        auto passes = [&](const IndexedLabel& l) {
            return !type_filter || recs[l.entity].etype == *type_filter;
        };

        std::unordered_map<std::uint32_t, Scored> best;  // entity -> best label
        auto consider = [&](std::uint32_t id, std::uint32_t shared) {
            const IndexedLabel& l = labels_[id];
            if (!passes(l)) return;
            Scored s = score_label(id, shared, qgrams.size(), qcps);
            auto [it, inserted] = best.emplace(l.entity, s);
            if (!inserted && better_label(s, it->second)) it->second = s;
        };
        for (const auto& [id, shared] : overlap) consider(id, shared);

        std::vector<Scored> ranked = collect(best);
        // A label sharing no trigram has J = 0 and L < 1, so it scores
        // strictly below 0.25 and cannot displace a k-th result at >= 0.25.
        if (ranked.size() < k || ranked[k - 1].score < kEditWeight) {
            for (std::uint32_t id = 0; id < labels_.size(); ++id)
                if (!overlap.contains(id)) consider(id, 0);
            ranked = collect(best);
        }
        if (ranked.size() > k) ranked.resize(k);

        std::vector<Candidate> out;
        out.reserve(ranked.size());
        for (const Scored& s : ranked) {
            const IndexedLabel& l = labels_[s.label];
            const EntityRecord& r = recs[l.entity];
            out.push_back(Candidate{r.uri, label_text(l), r.etype, s.score, s.edit});
        }
        return out;
    }

    bool operator==(const LabelIndex& o) const {
        return *store_ == *o.store_ && labels_ == o.labels_ && postings_ == o.postings_;
    }

private:
    friend LabelIndex load_index(const std::string& path);
    friend std::string serialize_index(const LabelIndex& index);

    struct Scored {
        std::uint32_t label;
        double score;
        double edit;
    };

    void add_label(std::uint32_t entity, std::uint32_t ordinal, const std::string& raw) {
        IndexedLabel l;
        l.entity = entity;
        l.ordinal = ordinal;
        l.normalized = text::normalize(raw);
        std::u32string cps = text::to_u32(l.normalized);
        std::vector<std::u32string> grams = text::padded_trigrams(cps);
        l.trigram_count = static_cast<std::uint32_t>(grams.size());
        auto id = static_cast<std::uint32_t>(labels_.size());
        for (auto& g : grams) postings_[g].push_back(id);
        labels_.push_back(std::move(l));
    }

    void finish() {
        cps_.clear();
        by_text_.clear();
        max_tokens_ = 0;
        for (std::uint32_t id = 0; id < labels_.size(); ++id) {
            cps_.push_back(text::to_u32(labels_[id].normalized));
            by_text_[labels_[id].normalized].push_back(id);
            max_tokens_ = std::max(max_tokens_, text::split_whitespace(labels_[id].normalized).size());
        }
    }

    Scored score_label(std::uint32_t id, std::uint32_t shared, std::size_t query_grams,
                       const std::u32string& qcps) const {
        const IndexedLabel& l = labels_[id];
        double jaccard = static_cast<double>(shared) /
                         static_cast<double>(query_grams + l.trigram_count - shared);
        double edit = text::levenshtein_similarity(qcps, cps_[id]);
        return Scored{id, lexical_score(jaccard, edit), edit};
    }

    bool better_label(const Scored& a, const Scored& b) const {
        if (a.score != b.score) return a.score > b.score;
        if (a.edit != b.edit) return a.edit > b.edit;
        return labels_[a.label].ordinal < labels_[b.label].ordinal;
    }

    std::vector<Scored> collect(const std::unordered_map<std::uint32_t, Scored>& best) const {
        std::vector<Scored> v;
        v.reserve(best.size());
        for (const auto& [entity, s] : best) v.push_back(s);
        const auto& recs = store_->records();
        std::sort(v.begin(), v.end(), [&](const Scored& a, const Scored& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.edit != b.edit) return a.edit > b.edit;
            return recs[labels_[a.label].entity].uri < recs[labels_[b.label].entity].uri;
        });
        return v;
    }

    std::shared_ptr<const EntityStore> store_;
    std::vector<IndexedLabel> labels_;
    Postings postings_;
    std::vector<std::u32string> cps_;
    std::unordered_map<std::string, std::vector<std::uint32_t>> by_text_;
    std::size_t max_tokens_ = 0;
};

inline LabelIndex build_index(std::shared_ptr<const EntityStore> store) {
    return LabelIndex(std::move(store));
}

inline LabelIndex build_index(const EntityStore& store) {
    return LabelIndex(std::make_shared<const EntityStore>(store));
}

// True iff the top candidate's normalized label equals that of another
// candidate with a different uri.
inline bool duplicate_label_exists(const std::vector<Candidate>& candidates) {
    if (candidates.size() < 2) return false;
    std::string top = text::normalize(candidates.front().matched_label);
    for (std::size_t i = 1; i < candidates.size(); ++i)
        if (candidates[i].uri != candidates.front().uri &&
            text::normalize(candidates[i].matched_label) == top)
            return true;
    return false;
}

// Any two candidates with different uris share a normalized label.
inline bool any_duplicate_label(const std::vector<Candidate>& candidates) {
    std::map<std::string, std::string> seen;  // label -> first uri
    for (const Candidate& c : candidates) {
        auto [it, inserted] = seen.emplace(text::normalize(c.matched_label), c.uri);
        if (!inserted && it->second != c.uri) return true;
    }
    return false;
}

namespace detail {
inline constexpr std::string_view kIndexMagic = "SKIX";
}

inline std::string serialize_index(const LabelIndex& index) {
    binio::Writer w(detail::kIndexMagic);
    detail::write_store(w, *index.store_);
    w.u32(static_cast<std::uint32_t>(index.labels_.size()));
    for (const IndexedLabel& l : index.labels_) {
        w.u32(l.entity);
        w.u32(l.ordinal);
        w.str(l.normalized);
        w.u32(l.trigram_count);
    }
    w.u32(static_cast<std::uint32_t>(index.postings_.size()));
    for (const auto& [gram, ids] : index.postings_) {
        w.str(text::to_utf8(gram));
        w.u32(static_cast<std::uint32_t>(ids.size()));
        for (std::uint32_t id : ids) w.u32(id);
    }
    return w.bytes();
}

inline void save_index(const LabelIndex& index, const std::string& path) {
    std::string bytes = serialize_index(index);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for '" + path + "'");
}

inline LabelIndex load_index(const std::string& path) {
    binio::Reader r = binio::Reader::open(path, detail::kIndexMagic);
    LabelIndex index;
    index.store_ = std::make_shared<const EntityStore>(detail::read_store(r));
    std::uint32_t n = r.count(16);
    const auto& recs = index.store_->records();
    index.labels_.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        IndexedLabel l;
        l.entity = r.u32();
        l.ordinal = r.u32();
        l.normalized = r.str();
        l.trigram_count = r.u32();
        if (l.entity >= recs.size() || l.ordinal > recs[l.entity].aliases.size())
            throw FormatVersionError(path + ": label table references a missing entity");
        index.labels_.push_back(std::move(l));
    }
    std::uint32_t np = r.count(8);
    for (std::uint32_t i = 0; i < np; ++i) {
        std::u32string gram = text::to_u32(r.str());
        std::uint32_t m = r.count(4);
        std::vector<std::uint32_t> ids(m);
        for (auto& id : ids) {
            id = r.u32();
            if (id >= n) throw FormatVersionError(path + ": posting references a missing label");
        }
        index.postings_.emplace(std::move(gram), std::move(ids));
    }
    r.expect_end();
    index.finish();
    return index;
}

}  // namespace scholink
