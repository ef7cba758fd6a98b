#pragma once
// Knowledge-graph embeddings: TransE, DistMult and ComplEx.
//
// Scores (higher = more plausible):
//   TransE    s = -||h + r - t||_2
//   DistMult  s = sum_i h_i r_i t_i
//   ComplEx   s = Re(sum_i h_i r_i conj(t_i))
// ComplEx vectors of length dim hold dim/2 complex numbers: real parts in
// [0, dim/2), imaginary parts in [dim/2, dim).
//
// Training is single-threaded SGD driven by one seeded mt19937_64, so a
// fixed (triples, config, kind) reproduces the same bits.

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "scholink/binary_io.hpp"
#include "scholink/error.hpp"
#include "scholink/ntriples.hpp"

namespace scholink {

enum class EmbeddingKind : std::uint8_t { TransE = 0, DistMult = 1, ComplEx = 2 };

// Listing order used by configuration, reports and the API.
inline constexpr EmbeddingKind kEmbeddingKinds[] = {EmbeddingKind::TransE, EmbeddingKind::ComplEx,
                                                     EmbeddingKind::DistMult};

inline std::string to_string(EmbeddingKind k) {
    switch (k) {
        case EmbeddingKind::TransE: return "transe";
        case EmbeddingKind::DistMult: return "distmult";
        case EmbeddingKind::ComplEx: return "complex";
    }
    return "?";
}

inline std::optional<EmbeddingKind> parse_embedding_kind(std::string_view s) {
    std::string l(s);
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
    if (l == "transe") return EmbeddingKind::TransE;
    if (l == "distmult") return EmbeddingKind::DistMult;
    if (l == "complex") return EmbeddingKind::ComplEx;
    return std::nullopt;
}

// Rows of equal-length vectors keyed by IRI, in insertion order.
class VectorTable {
public:
    VectorTable() = default;
    explicit VectorTable(std::size_t dim) : dim_(dim) {}

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return keys_.size(); }
    const std::vector<std::string>& keys() const noexcept { return keys_; }

    std::size_t add(const std::string& key, std::span<const double> v) {
        if (v.size() != dim_) throw DimensionMismatch(dim_, v.size());
        auto [it, inserted] = index_.emplace(key, keys_.size());
        if (!inserted) throw UserError("duplicate_key", "duplicate vector key '" + key + "'");
        keys_.push_back(key);
        data_.insert(data_.end(), v.begin(), v.end());
        return it->second;
    }

    std::optional<std::size_t> find(std::string_view key) const {
        auto it = index_.find(std::string(key));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

    std::optional<std::span<const double>> get(std::string_view key) const {
        auto i = find(key);
        if (!i) return std::nullopt;
        return row(*i);
    }

    const std::vector<double>& data() const noexcept { return data_; }

    bool operator==(const VectorTable& o) const {
        if (dim_ != o.dim_ || keys_ != o.keys_ || data_.size() != o.data_.size()) return false;
        // Bitwise, so NaN payloads and signed zeros count.
        for (std::size_t i = 0; i < data_.size(); ++i)
            if (std::bit_cast<std::uint64_t>(data_[i]) != std::bit_cast<std::uint64_t>(o.data_[i]))
                return false;
        return true;
    }

private:
    std::size_t dim_ = 0;
    std::vector<std::string> keys_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<double> data_;
};

struct KgEmbeddingSet {
    EmbeddingKind kind = EmbeddingKind::TransE;
    std::size_t dim = 200;
    VectorTable entities;
    VectorTable relations;

    KgEmbeddingSet() = default;
    KgEmbeddingSet(EmbeddingKind k, std::size_t d) : kind(k), dim(d), entities(d), relations(d) {
        if (d == 0) throw DimensionMismatch("embedding dimension must be positive");
        if (k == EmbeddingKind::ComplEx && d % 2 != 0)
            throw DimensionMismatch("ComplEx embeddings need an even dimension");
    }

    std::optional<std::span<const double>> entity(std::string_view uri) const {
        return entities.get(uri);
    }

    void validate() const {
        if (entities.dim() != dim || relations.dim() != dim)
            throw DimensionMismatch("table dimension differs from set dimension");
        if (kind == EmbeddingKind::ComplEx && dim % 2 != 0)
            throw DimensionMismatch("ComplEx embeddings need an even dimension");
        for (double v : entities.data())
            if (!std::isfinite(v)) throw UserError("non_finite_vector", "non-finite entity component");
        for (double v : relations.data())
            if (!std::isfinite(v)) throw UserError("non_finite_vector", "non-finite relation component");
    }

    bool operator==(const KgEmbeddingSet&) const = default;
};

struct EmbedTrainConfig {
    std::size_t epochs = 100;
    double learning_rate = 0.01;
    double margin = 1.0;  // TransE only
    std::size_t negatives_per_positive = 1;
    std::uint64_t seed = 42;
    std::size_t dim = 200;

    void validate() const {
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
        if (!(learning_rate > 0)) throw ConfigError("learning rate must be > 0");
        if (!(margin > 0)) throw ConfigError("margin must be > 0");
        if (negatives_per_positive < 1) throw ConfigError("negatives per positive must be >= 1");
        if (dim < 1) throw ConfigError("dim must be >= 1");
    }
};

namespace embed {

inline void check_dims(EmbeddingKind kind, std::size_t a, std::size_t b, std::size_t c) {
    if (a != b) throw DimensionMismatch(a, b);
    if (a != c) throw DimensionMismatch(a, c);
    if (kind == EmbeddingKind::ComplEx && a % 2 != 0)
        throw DimensionMismatch("ComplEx vectors need an even length");
}

inline double transe_distance(std::span<const double> h, std::span<const double> r,
                              std::span<const double> t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        double d = h[i] + r[i] - t[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

inline double score(EmbeddingKind kind, std::span<const double> h, std::span<const double> r,
                    std::span<const double> t) {
    check_dims(kind, h.size(), r.size(), t.size());
    switch (kind) {
        case EmbeddingKind::TransE: return -transe_distance(h, r, t);
        case EmbeddingKind::DistMult: {
            double s = 0.0;
            // (h * t) * r keeps the head/tail swap bit-exact.
            for (std::size_t i = 0; i < h.size(); ++i) s += (h[i] * t[i]) * r[i];
            return s;
        }
        case EmbeddingKind::ComplEx: {
            const std::size_t n = h.size() / 2;
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double hr = h[i], hi = h[n + i], rr = r[i], ri = r[n + i];
                const double tr = t[i], ti = t[n + i];
                s += (hr * rr - hi * ri) * tr + (hr * ri + hi * rr) * ti;
            }
            return s;
        }
    }
    return 0.0;
}

// d score / d(h, r, t) for the bilinear kinds, accumulated with weight w.
inline void add_bilinear_grad(EmbeddingKind kind, std::span<const double> h,
                              std::span<const double> r, std::span<const double> t, double w,
                              std::span<double> gh, std::span<double> gr, std::span<double> gt) {
    if (kind == EmbeddingKind::DistMult) {
        for (std::size_t i = 0; i < h.size(); ++i) {
            gh[i] += w * r[i] * t[i];
            gr[i] += w * h[i] * t[i];
            gt[i] += w * h[i] * r[i];
        }
        return;
    }
    const std::size_t n = h.size() / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const double hr = h[i], hi = h[n + i], rr = r[i], ri = r[n + i];
        const double tr = t[i], ti = t[n + i];
        gh[i] += w * (rr * tr + ri * ti);
        gh[n + i] += w * (rr * ti - ri * tr);
        gr[i] += w * (hr * tr + hi * ti);
        gr[n + i] += w * (hr * ti - hi * tr);
        gt[i] += w * (hr * rr - hi * ri);
        gt[n + i] += w * (hr * ri + hi * rr);
    }
}

// log(1 + exp(-x)), stable for large |x|.
inline double softplus_neg(double x) {
    return std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline double logistic_loss(EmbeddingKind kind, std::span<const double> h, std::span<const double> r,
                            std::span<const double> t, double y) {
    return softplus_neg(y * score(kind, h, r, t));
}

// Returns the loss and accumulates its gradient.
inline double logistic_loss_grad(EmbeddingKind kind, std::span<const double> h,
                                 std::span<const double> r, std::span<const double> t, double y,
                                 std::span<double> gh, std::span<double> gr, std::span<double> gt) {
    const double s = score(kind, h, r, t);
    const double z = y * s;
    // dL/ds = -y * sigmoid(-z)
    const double sig = z >= 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
    add_bilinear_grad(kind, h, r, t, -y * sig, gh, gr, gt);
    return softplus_neg(z);
}

inline double transe_margin_loss(std::span<const double> h, std::span<const double> r,
                                 std::span<const double> t, std::span<const double> nh,
                                 std::span<const double> nt, double margin) {
    return std::max(0.0, margin + transe_distance(h, r, t) - transe_distance(nh, r, nt));
}

// Gradient of max(0, m + d(h,r,t) - d(nh,r,nt)); exactly zero when the
// hinge is inactive.
inline double transe_margin_loss_grad(std::span<const double> h, std::span<const double> r,
                                      std::span<const double> t, std::span<const double> nh,
                                      std::span<const double> nt, double margin,
                                      std::span<double> gh, std::span<double> gr,
                                      std::span<double> gt, std::span<double> gnh,
                                      std::span<double> gnt) {
    const double dpos = transe_distance(h, r, t);
    const double dneg = transe_distance(nh, r, nt);
    const double loss = margin + dpos - dneg;
    if (loss <= 0) return 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double up = dpos > 0 ? (h[i] + r[i] - t[i]) / dpos : 0.0;
        const double un = dneg > 0 ? (nh[i] + r[i] - nt[i]) / dneg : 0.0;
        gh[i] += up;
        gt[i] -= up;
        gr[i] += up - un;
        gnh[i] -= un;
        gnt[i] += un;
    }
    return loss;
}

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

inline void normalize_unit(std::span<double> v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n > 0)
        for (double& x : v) x /= n;
}

}  // namespace embed

inline double score(EmbeddingKind kind, std::span<const double> h, std::span<const double> r,
                    std::span<const double> t) {
    return embed::score(kind, h, r, t);
}

// Entity-to-entity triples indexed densely; entities and relations sorted.
struct IndexedTriples {
    std::vector<std::string> entities;
    std::vector<std::string> relations;
    struct Row {
        std::uint32_t h, r, t;
    };
    std::vector<Row> rows;
    std::unordered_set<std::uint64_t> known;

    std::uint64_t key(std::uint32_t h, std::uint32_t r, std::uint32_t t) const {
        return (static_cast<std::uint64_t>(h) * relations.size() + r) * entities.size() + t;
    }

    // Keeps IRI-object triples; with `allowed`, both ends must be in it.
    static IndexedTriples from(const std::vector<Triple>& triples,
                               const std::unordered_set<std::string>* allowed = nullptr) {
        IndexedTriples it;
        std::set<std::string> ents, rels;
        for (const Triple& t : triples) {
            if (!t.object_is_iri()) continue;
            if (allowed && (!allowed->contains(t.subject) || !allowed->contains(t.object_iri().value)))
                continue;
            ents.insert(t.subject);
            ents.insert(t.object_iri().value);
            rels.insert(t.predicate);
        }
        it.entities.assign(ents.begin(), ents.end());
        it.relations.assign(rels.begin(), rels.end());
        std::unordered_map<std::string, std::uint32_t> eid, rid;
        for (std::uint32_t i = 0; i < it.entities.size(); ++i) eid[it.entities[i]] = i;
        for (std::uint32_t i = 0; i < it.relations.size(); ++i) rid[it.relations[i]] = i;
        for (const Triple& t : triples) {
            if (!t.object_is_iri()) continue;
            auto h = eid.find(t.subject);
            auto o = eid.find(t.object_iri().value);
            if (h == eid.end() || o == eid.end()) continue;
            Row row{h->second, rid.at(t.predicate), o->second};
            if (it.known.insert(it.key(row.h, row.r, row.t)).second) it.rows.push_back(row);
        }
        return it;
    }
};

struct EmbedTrainReport {
    std::vector<double> epoch_mean_loss;
};

inline KgEmbeddingSet train_embeddings(const std::vector<Triple>& triples, const EmbedTrainConfig& cfg,
                                       EmbeddingKind kind, EmbedTrainReport* report = nullptr,
                                       const std::unordered_set<std::string>* allowed = nullptr) {
    cfg.validate();
    const IndexedTriples data = IndexedTriples::from(triples, allowed);
    if (data.rows.empty()) throw NoTrainableTriples();

    const std::size_t dim = cfg.dim;
    KgEmbeddingSet set(kind, dim);
    std::mt19937_64 rng(cfg.seed);
    const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
    std::vector<double> init(dim);
    auto draw = [&] {
        for (double& x : init) x = (2.0 * embed::uniform01(rng) - 1.0) * bound;
    };
    for (const auto& e : data.entities) {
        draw();
        if (kind == EmbeddingKind::TransE) embed::normalize_unit(init);
        set.entities.add(e, init);
    }
    for (const auto& r : data.relations) {
        draw();
        if (kind == EmbeddingKind::TransE) embed::normalize_unit(init);
        set.relations.add(r, init);
    }

    const auto n_ent = data.entities.size();
    std::vector<double> gh(dim), gr(dim), gt(dim), gnh(dim), gnt(dim);
    auto zero = [](std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); };
    auto step = [&](std::span<double> p, const std::vector<double>& g) {
        for (std::size_t i = 0; i < dim; ++i) p[i] -= cfg.learning_rate * g[i];
    };

    std::vector<std::size_t> order(data.rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    EmbedTrainReport rep;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[embed::uniform_index(rng, i)]);
        double total = 0.0;
        std::size_t terms = 0;
        for (std::size_t idx : order) {
            const auto& row = data.rows[idx];
            if (kind != EmbeddingKind::TransE) {
                zero(gh), zero(gr), zero(gt);
                total += embed::logistic_loss_grad(kind, set.entities.row(row.h), set.relations.row(row.r),
                                                   set.entities.row(row.t), 1.0, gh, gr, gt);
                ++terms;
                step(set.entities.row(row.h), gh);
                step(set.relations.row(row.r), gr);
                step(set.entities.row(row.t), gt);
            }
            for (std::size_t n = 0; n < cfg.negatives_per_positive; ++n) {
                const bool corrupt_head = (rng() & 1ULL) != 0;
                std::uint32_t nh = row.h, nt = row.t;
                for (int attempt = 0; attempt < 100; ++attempt) {
                    auto e = static_cast<std::uint32_t>(embed::uniform_index(rng, n_ent));
                    nh = corrupt_head ? e : row.h;
                    nt = corrupt_head ? row.t : e;
                    if (!data.known.contains(data.key(nh, row.r, nt))) break;
                }
                zero(gh), zero(gr), zero(gt), zero(gnh), zero(gnt);
                if (kind == EmbeddingKind::TransE) {
                    total += embed::transe_margin_loss_grad(
                        set.entities.row(row.h), set.relations.row(row.r), set.entities.row(row.t),
                        set.entities.row(nh), set.entities.row(nt), cfg.margin, gh, gr, gt, gnh, gnt);
                    ++terms;
                    step(set.entities.row(row.h), gh);
                    step(set.relations.row(row.r), gr);
                    step(set.entities.row(row.t), gt);
                    step(set.entities.row(nh), gnh);
                    step(set.entities.row(nt), gnt);
                    embed::normalize_unit(set.entities.row(row.h));
                    embed::normalize_unit(set.entities.row(row.t));
                    embed::normalize_unit(set.entities.row(nh));
                    embed::normalize_unit(set.entities.row(nt));
                } else {
                    total += embed::logistic_loss_grad(kind, set.entities.row(nh), set.relations.row(row.r),
                                                       set.entities.row(nt), -1.0, gnh, gr, gnt);
                    ++terms;
                    step(set.entities.row(nh), gnh);
                    step(set.relations.row(row.r), gr);
                    step(set.entities.row(nt), gnt);
                }
            }
        }
        double mean = total / static_cast<double>(terms);
        if (!std::isfinite(mean))
            throw NonFiniteGradient("embedding loss became non-finite in epoch " + std::to_string(epoch + 1));
        rep.epoch_mean_loss.push_back(mean);
    }
    if (report != nullptr) *report = std::move(rep);
    return set;
}

struct LinkPredictionResult {
    std::size_t queries = 0;
    double hits_at_1 = 0.0;
    double hits_at_10 = 0.0;
    double mean_rank = 0.0;
};

// Filtered tail prediction: rank the true tail against every entity, skipping
// other known tails of (h, r). Ties count against the true tail.
inline LinkPredictionResult evaluate_link_prediction(const KgEmbeddingSet& set,
                                                     const std::vector<Triple>& triples) {
    const IndexedTriples data = IndexedTriples::from(triples);
    LinkPredictionResult res;
    std::vector<std::optional<std::span<const double>>> ent(data.entities.size());
    for (std::size_t i = 0; i < ent.size(); ++i) ent[i] = set.entity(data.entities[i]);
    std::size_t hits1 = 0, hits10 = 0;
    double rank_sum = 0.0;
    for (const auto& row : data.rows) {
        auto rel = set.relations.get(data.relations[row.r]);
        if (!ent[row.h] || !ent[row.t] || !rel) continue;
        const double target = score(set.kind, *ent[row.h], *rel, *ent[row.t]);
        std::size_t rank = 1;
        for (std::uint32_t e = 0; e < ent.size(); ++e) {
            if (e == row.t || !ent[e] || data.known.contains(data.key(row.h, row.r, e))) continue;
            if (score(set.kind, *ent[row.h], *rel, *ent[e]) >= target) ++rank;
        }
        ++res.queries;
        hits1 += rank == 1;
        hits10 += rank <= 10;
        rank_sum += static_cast<double>(rank);
    }
    if (res.queries > 0) {
        const auto q = static_cast<double>(res.queries);
        res.hits_at_1 = static_cast<double>(hits1) / q;
        res.hits_at_10 = static_cast<double>(hits10) / q;
        res.mean_rank = rank_sum / q;
    }
    return res;
}

// Parameters of one training term. TransE uses all five vectors and the
// margin; the bilinear kinds use (h, r, t) and the label y = +1 / -1.
struct GradPoint {
    std::vector<double> h, r, t, neg_h, neg_t;
    double label = 1.0;
    double margin = 1.0;
};

inline double grad_point_loss(EmbeddingKind kind, const GradPoint& p) {
    if (kind == EmbeddingKind::TransE)
        return embed::transe_margin_loss(p.h, p.r, p.t, p.neg_h, p.neg_t, p.margin);
    return embed::logistic_loss(kind, p.h, p.r, p.t, p.label);
}

// Analytic gradient, flattened in the order h, r, t[, neg_h, neg_t].
inline std::vector<double> grad_point_gradient(EmbeddingKind kind, const GradPoint& p) {
    const std::size_t d = p.h.size();
    if (kind == EmbeddingKind::TransE) {
        std::vector<double> g(5 * d, 0.0);
        std::span<double> s(g);
        embed::transe_margin_loss_grad(p.h, p.r, p.t, p.neg_h, p.neg_t, p.margin, s.subspan(0, d),
                                       s.subspan(d, d), s.subspan(2 * d, d), s.subspan(3 * d, d),
                                       s.subspan(4 * d, d));
        return g;
    }
    std::vector<double> g(3 * d, 0.0);
    std::span<double> s(g);
    embed::logistic_loss_grad(kind, p.h, p.r, p.t, p.label, s.subspan(0, d), s.subspan(d, d),
                              s.subspan(2 * d, d));
    return g;
}

// max over parameters of |analytic - central difference| / max(1, |analytic|).
inline double grad_check(EmbeddingKind kind, const GradPoint& point, double h_step) {
    if (!(h_step > 0)) throw ConfigError("finite-difference step must be > 0");
    const std::vector<double> analytic = grad_point_gradient(kind, point);
    GradPoint p = point;
    std::vector<std::vector<double>*> blocks = {&p.h, &p.r, &p.t};
    if (kind == EmbeddingKind::TransE) {
        blocks.push_back(&p.neg_h);
        blocks.push_back(&p.neg_t);
    }
    double worst = 0.0;
    std::size_t flat = 0;
    for (auto* block : blocks) {
        for (double& x : *block) {
            const double orig = x;
            x = orig + h_step;
            const double up = grad_point_loss(kind, p);
            x = orig - h_step;
            const double down = grad_point_loss(kind, p);
            x = orig;
            const double numeric = (up - down) / (2.0 * h_step);
            const double a = analytic[flat++];
            if (!std::isfinite(numeric) || !std::isfinite(a))
                throw NonFiniteGradient("non-finite gradient component " + std::to_string(flat - 1));
            worst = std::max(worst, std::abs(a - numeric) / std::max(1.0, std::abs(a)));
        }
    }
    return worst;
}

// Seeded random point. For TransE the hinge is forced strictly active with
// slack well above the finite-difference step, away from the kink.
inline GradPoint sample_grad_point(EmbeddingKind kind, std::size_t dim, std::mt19937_64& rng,
                                   double margin = 1.0) {
    auto vec = [&] {
        std::vector<double> v(dim);
        for (double& x : v) x = 2.0 * embed::uniform01(rng) - 1.0;
        return v;
    };
    GradPoint p;
    p.margin = margin;
    while (true) {
        p.h = vec(), p.r = vec(), p.t = vec(), p.neg_h = vec(), p.neg_t = vec();
        p.label = (rng() & 1ULL) ? 1.0 : -1.0;
        if (kind != EmbeddingKind::TransE) return p;
        const double slack = margin + embed::transe_distance(p.h, p.r, p.t) -
                             embed::transe_distance(p.neg_h, p.r, p.neg_t);
        if (slack > 1e-2) return p;
    }
}

namespace detail {
inline constexpr std::string_view kEmbeddingMagic = "SKEM";

inline void write_table(binio::Writer& w, const VectorTable& t) {
    for (const auto& k : t.keys()) w.str(k);
    for (double v : t.data()) w.f64(v);
}

inline void read_table(binio::Reader& r, VectorTable& t, std::uint32_t n, std::size_t dim) {
    std::vector<std::string> keys(n);
    for (auto& k : keys) k = r.str();
    std::vector<double> v(dim);
    for (const auto& k : keys) {
        for (double& x : v) x = r.f64();
        t.add(k, v);
    }
}
}  // namespace detail

inline std::string serialize_embeddings(const KgEmbeddingSet& set) {
    binio::Writer w(detail::kEmbeddingMagic);
    w.u8(static_cast<std::uint8_t>(set.kind));
    w.u32(static_cast<std::uint32_t>(set.dim));
    w.u32(static_cast<std::uint32_t>(set.entities.size()));
    w.u32(static_cast<std::uint32_t>(set.relations.size()));
    detail::write_table(w, set.entities);
    detail::write_table(w, set.relations);
    return w.bytes();
}

inline void save_embeddings(const KgEmbeddingSet& set, const std::string& path) {
    std::string bytes = serialize_embeddings(set);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for '" + path + "'");
}

inline KgEmbeddingSet load_embeddings(const std::string& path,
                                      std::optional<EmbeddingKind> expected = std::nullopt) {
    binio::Reader r = binio::Reader::open(path, detail::kEmbeddingMagic);
    std::uint8_t kind_byte = r.u8();
    if (kind_byte > 2) throw FormatVersionError(path + ": unknown embedding kind " + std::to_string(kind_byte));
    auto kind = static_cast<EmbeddingKind>(kind_byte);
    if (expected && *expected != kind)
        throw KindMismatch(path + " holds " + to_string(kind) + " embeddings, expected " +
                           to_string(*expected));
    std::uint32_t dim = r.u32();
    std::uint32_t ne = r.u32();
    std::uint32_t nr = r.u32();
    const std::size_t need = (static_cast<std::size_t>(ne) + nr) * (4 + 8 * static_cast<std::size_t>(dim));
    if (need > r.remaining()) throw FormatVersionError(path + ": truncated payload");
    KgEmbeddingSet set;
    try {
        set = KgEmbeddingSet(kind, dim);
    } catch (const DimensionMismatch& e) {
        throw FormatVersionError(path + ": " + e.what());
    }
    detail::read_table(r, set.entities, ne, dim);
    detail::read_table(r, set.relations, nr, dim);
    r.expect_end();
    return set;
}

// Debug interop: one "uri \t v1 \t ... \t vdim" line per vector.
inline void export_tsv(const VectorTable& table, std::ostream& out) {
    out << std::setprecision(17);
    for (std::size_t i = 0; i < table.size(); ++i) {
        out << table.keys()[i];
        for (double v : table.row(i)) out << '\t' << v;
        out << '\n';
    }
}

inline VectorTable import_tsv(std::istream& in, std::optional<std::size_t> dim = std::nullopt) {
    VectorTable table;
    bool sized = false;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, '\t')) cols.push_back(col);
        if (cols.size() < 2) throw ParseError(number, "expected uri followed by values");
        std::vector<double> v;
        v.reserve(cols.size() - 1);
        for (std::size_t i = 1; i < cols.size(); ++i) {
            try {
                std::size_t used = 0;
                v.push_back(std::stod(cols[i], &used));
                if (used != cols[i].size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw ParseError(number, "bad number '" + cols[i] + "'");
            }
            if (!std::isfinite(v.back())) throw ParseError(number, "non-finite value");
        }
        if (!sized) {
            if (dim && *dim != v.size()) throw DimensionMismatch(*dim, v.size());
            table = VectorTable(v.size());
            sized = true;
        }
        if (v.size() != table.dim()) throw ParseError(number, "row length differs from first row");
        table.add(cols[0], v);
    }
    if (!sized && dim) table = VectorTable(*dim);
    return table;
}

}  // namespace scholink
