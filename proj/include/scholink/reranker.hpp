#pragma once
// Siamese re-ranker over 969-dimensional feature vectors.
//
// Feature layout:
//   [0, 768)    text embedding (question text, or entity label)
//   [768, 968)  KG embedding of the entity; zero for questions
//   [968]       label/question string similarity; zero for questions
//
// One shared encoder f(x) = W2 * relu(W1 * x + b1) + b2 maps both sides.
// Training minimizes the triplet loss max(0, |f(a)-f(p)| - |f(a)-f(n)| + m)
// under L2 distance; ranking uses cosine distance 1 - cos(f(q), f(e)).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "scholink/binary_io.hpp"
#include "scholink/error.hpp"
#include "scholink/kg_store.hpp"
#include "scholink/label_index.hpp"
#include "scholink/text.hpp"
#include "scholink/text_encoder.hpp"

namespace scholink {

inline constexpr std::size_t kFeatureDim = 969;
inline constexpr std::size_t kKgSlot = 768;
inline constexpr std::size_t kKgDim = 200;
inline constexpr std::size_t kSimSlot = 968;

class FeatureVector969 {
public:
    FeatureVector969() : values_(kFeatureDim, 0.0) {}

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> mutable_values() noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    Eigen::Map<const Eigen::VectorXd> as_eigen() const {
        return {values_.data(), static_cast<Eigen::Index>(values_.size())};
    }

    bool operator==(const FeatureVector969&) const = default;

private:
    std::vector<double> values_;
};

// Best match of the label against any equal-length character window of the
// question (whole question when the label is longer), as 1 - d / max length.
inline double string_similarity(std::string_view label, std::string_view question) {
    const std::u32string l = text::to_u32(text::normalize(label));
    const std::u32string q = text::to_u32(text::normalize(question));
    if (l.empty() || q.empty()) throw EmptyText();
    if (l.size() >= q.size()) return text::levenshtein_similarity(l, q);
    double best = 0.0;
    const std::u32string_view qv(q);
    for (std::size_t start = 0; start + l.size() <= q.size(); ++start) {
        best = std::max(best, text::levenshtein_similarity(l, qv.substr(start, l.size())));
        if (best == 1.0) break;
    }
    return best;
}

inline FeatureVector969 compose_question(const TextEmbedding768& q) {
    FeatureVector969 fv;
    std::copy(q.values().begin(), q.values().end(), fv.mutable_values().begin());
    return fv;
}

inline FeatureVector969 compose_entity(const TextEmbedding768& label, std::span<const double> kg,
                                       double sim) {
    if (kg.size() != kKgDim) throw DimensionMismatch(kKgDim, kg.size());
    if (!(sim >= 0.0 && sim <= 1.0)) throw SimOutOfRange(sim);
    FeatureVector969 fv;
    auto out = fv.mutable_values();
    std::copy(label.values().begin(), label.values().end(), out.begin());
    std::copy(kg.begin(), kg.end(), out.begin() + kKgSlot);
    out[kSimSlot] = sim;
    return fv;
}

struct SiameseParams {
    Eigen::MatrixXd w1;  // hidden x 969
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;  // out x hidden
    Eigen::VectorXd b2;

    static constexpr std::size_t kDefaultHidden = 256;
    static constexpr std::size_t kDefaultOut = 128;

    Eigen::Index input_dim() const { return w1.cols(); }
    Eigen::Index hidden_dim() const { return w1.rows(); }
    Eigen::Index output_dim() const { return w2.rows(); }

    static SiameseParams zeros(std::size_t hidden = kDefaultHidden, std::size_t out = kDefaultOut) {
        const auto h = static_cast<Eigen::Index>(hidden), o = static_cast<Eigen::Index>(out);
        return {Eigen::MatrixXd::Zero(h, kFeatureDim), Eigen::VectorXd::Zero(h),
                Eigen::MatrixXd::Zero(o, h), Eigen::VectorXd::Zero(o)};
    }

    // Xavier-uniform weights from a seeded generator, zero biases.
    static SiameseParams random(std::uint64_t seed, std::size_t hidden = kDefaultHidden,
                                std::size_t out = kDefaultOut) {
        SiameseParams p = zeros(hidden, out);
        std::mt19937_64 rng(seed);
        auto fill = [&](Eigen::MatrixXd& m) {
            const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                for (Eigen::Index i = 0; i < m.rows(); ++i)
                    m(i, j) = (2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0) * bound;
        };
        fill(p.w1);
        fill(p.w2);
        return p;
    }

    bool all_finite() const {
        return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite();
    }

    bool operator==(const SiameseParams& o) const {
        return w1.rows() == o.w1.rows() && w2.rows() == o.w2.rows() && w1 == o.w1 && b1 == o.b1 &&
               w2 == o.w2 && b2 == o.b2;
    }
};

inline Eigen::VectorXd forward(const SiameseParams& p, const FeatureVector969& x) {
    Eigen::VectorXd h = (p.w1 * x.as_eigen() + p.b1).cwiseMax(0.0);
    Eigen::VectorXd z = p.w2 * h + p.b2;
    if (!z.allFinite()) throw NonFiniteOutput();
    return z;
}

inline double triplet_loss(const SiameseParams& p, const FeatureVector969& anchor,
                           const FeatureVector969& positive, const FeatureVector969& negative,
                           double margin) {
    const Eigen::VectorXd za = forward(p, anchor);
    const double dp = (za - forward(p, positive)).norm();
    const double dn = (za - forward(p, negative)).norm();
    return std::max(0.0, dp - dn + margin);
}

struct TripletExample {
    FeatureVector969 question;
    FeatureVector969 positive;
    FeatureVector969 negative;
};

namespace rerank_detail {

struct Grad {
    Eigen::MatrixXd w1, w2;
    Eigen::VectorXd b1, b2;

    explicit Grad(const SiameseParams& p)
        : w1(Eigen::MatrixXd::Zero(p.w1.rows(), p.w1.cols())),
          w2(Eigen::MatrixXd::Zero(p.w2.rows(), p.w2.cols())),
          b1(Eigen::VectorXd::Zero(p.b1.size())), b2(Eigen::VectorXd::Zero(p.b2.size())) {}
};

// Columns of `x` are inputs of one branch. Adds that branch's parameter
// gradient given dL/dz for every column.
inline void backprop(const SiameseParams& p, const Eigen::MatrixXd& x, const Eigen::MatrixXd& u,
                     const Eigen::MatrixXd& h, const Eigen::MatrixXd& gz, Grad& g) {
    g.w2.noalias() += gz * h.transpose();
    g.b2 += gz.rowwise().sum();
    Eigen::MatrixXd gu = (p.w2.transpose() * gz).cwiseProduct((u.array() > 0.0).cast<double>().matrix());
    g.w1.noalias() += gu * x.transpose();
    g.b1 += gu.rowwise().sum();
}

// Mean triplet loss over a batch and its gradient (scaled by 1/batch).
inline double batch_loss_grad(const SiameseParams& p, const std::vector<const TripletExample*>& batch,
                              double margin, Grad* grad) {
    const auto n = static_cast<Eigen::Index>(batch.size());
    Eigen::MatrixXd xa(kFeatureDim, n), xp(kFeatureDim, n), xn(kFeatureDim, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        xa.col(j) = batch[j]->question.as_eigen();
        xp.col(j) = batch[j]->positive.as_eigen();
        xn.col(j) = batch[j]->negative.as_eigen();
    }
    auto run = [&](const Eigen::MatrixXd& x, Eigen::MatrixXd& u, Eigen::MatrixXd& h) {
        u = (p.w1 * x).colwise() + p.b1;
        h = u.cwiseMax(0.0);
        return Eigen::MatrixXd((p.w2 * h).colwise() + p.b2);
    };
    Eigen::MatrixXd ua, ha, up, hp, un, hn;
    const Eigen::MatrixXd za = run(xa, ua, ha), zp = run(xp, up, hp), zn = run(xn, un, hn);

    Eigen::MatrixXd ga = Eigen::MatrixXd::Zero(za.rows(), n), gp = ga, gn = ga;
    double total = 0.0;
    const double scale = 1.0 / static_cast<double>(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::VectorXd dpv = za.col(j) - zp.col(j);
        const Eigen::VectorXd dnv = za.col(j) - zn.col(j);
        const double dp = dpv.norm(), dn = dnv.norm();
        const double loss = dp - dn + margin;
        if (loss <= 0.0) continue;
        total += loss;
        if (grad == nullptr) continue;
        const Eigen::VectorXd up_ = dp > 0 ? Eigen::VectorXd(dpv / dp) : Eigen::VectorXd::Zero(dpv.size());
        const Eigen::VectorXd un_ = dn > 0 ? Eigen::VectorXd(dnv / dn) : Eigen::VectorXd::Zero(dnv.size());
        ga.col(j) = scale * (up_ - un_);
        gp.col(j) = -scale * up_;
        gn.col(j) = scale * un_;
    }
    if (grad != nullptr) {
        backprop(p, xa, ua, ha, ga, *grad);
        backprop(p, xp, up, hp, gp, *grad);
        backprop(p, xn, un, hn, gn, *grad);
    }
    return total * scale;
}

}  // namespace rerank_detail

// Analytic gradient of triplet_loss for one example, as parameter-shaped
// matrices (zero when the hinge is inactive).
inline SiameseParams triplet_loss_gradient(const SiameseParams& p, const TripletExample& ex,
                                           double margin) {
    rerank_detail::Grad g(p);
    rerank_detail::batch_loss_grad(p, {&ex}, margin, &g);
    return {g.w1, g.b1, g.w2, g.b2};
}

enum class NegativePolicy { HardThenRandom, Random };

struct RerankTrainConfig {
    double margin = 1.0;
    double learning_rate = 0.05;
    std::size_t epochs = 20;
    std::size_t batch_size = 16;
    std::uint64_t seed = 7;
    std::size_t hidden = SiameseParams::kDefaultHidden;
    std::size_t out = SiameseParams::kDefaultOut;
    NegativePolicy negatives = NegativePolicy::HardThenRandom;

    void validate() const {
        if (!(margin > 0)) throw ConfigError("margin must be > 0");
        if (!(learning_rate > 0)) throw ConfigError("learning rate must be > 0");
        if (epochs < 1) throw ConfigError("epochs must be >= 1");
        if (batch_size < 1) throw ConfigError("batch size must be >= 1");
        if (hidden < 1 || out < 1) throw ConfigError("layer widths must be >= 1");
    }
};

struct RerankTrainReport {
    double initial_mean_loss = 0.0;
    std::vector<double> epoch_mean_loss;  // measured after each epoch
};

inline double mean_triplet_loss(const SiameseParams& p, const std::vector<TripletExample>& data,
                                double margin) {
    std::vector<const TripletExample*> all;
    all.reserve(data.size());
    for (const auto& ex : data) all.push_back(&ex);
    return rerank_detail::batch_loss_grad(p, all, margin, nullptr);
}

// Minibatch gradient descent on the mean triplet loss.
inline SiameseParams train_reranker(const std::vector<TripletExample>& data, const RerankTrainConfig& cfg,
                                    RerankTrainReport* report = nullptr) {
    cfg.validate();
    if (data.empty()) throw EmptyDataset();
    SiameseParams p = SiameseParams::random(cfg.seed, cfg.hidden, cfg.out);
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    RerankTrainReport rep;
    rep.initial_mean_loss = mean_triplet_loss(p, data, cfg.margin);
    if (!std::isfinite(rep.initial_mean_loss)) throw DivergedLoss(0);

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::vector<const TripletExample*> batch;
            for (std::size_t i = start; i < std::min(order.size(), start + cfg.batch_size); ++i)
                batch.push_back(&data[order[i]]);
            rerank_detail::Grad g(p);
            const double loss = rerank_detail::batch_loss_grad(p, batch, cfg.margin, &g);
            if (!std::isfinite(loss)) throw DivergedLoss(epoch);
            p.w1 -= cfg.learning_rate * g.w1;
            p.b1 -= cfg.learning_rate * g.b1;
            p.w2 -= cfg.learning_rate * g.w2;
            p.b2 -= cfg.learning_rate * g.b2;
        }
        const double mean = mean_triplet_loss(p, data, cfg.margin);
        if (!std::isfinite(mean) || !p.all_finite()) throw DivergedLoss(epoch);
        rep.epoch_mean_loss.push_back(mean);
    }
    if (report != nullptr) *report = std::move(rep);
    return p;
}

struct RankedEntity {
    std::string uri;
    std::string matched_label;
    EntityType etype;
    double distance = 0.0;

    bool operator==(const RankedEntity&) const = default;
};

// 1 - cos(a, b) clamped to [0, 2]; a zero vector counts as orthogonal.
inline double cosine_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 1.0;
    return std::clamp(1.0 - a.dot(b) / (na * nb), 0.0, 2.0);
}

// `encode` is any map from a feature vector to its output embedding; the
// production path passes forward() bound to trained parameters.
template <class Encode>
std::vector<RankedEntity> rank_with(Encode&& encode, const FeatureVector969& question,
                                    const std::vector<std::pair<Candidate, FeatureVector969>>& candidates) {
    if (candidates.empty()) throw EmptyCandidates();
    const Eigen::VectorXd zq = encode(question);
    std::vector<RankedEntity> out;
    out.reserve(candidates.size());
    for (const auto& [cand, fv] : candidates)
        out.push_back(RankedEntity{cand.uri, cand.matched_label, cand.etype,
                                   cosine_distance(zq, encode(fv))});
    std::stable_sort(out.begin(), out.end(), [](const RankedEntity& a, const RankedEntity& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.uri < b.uri;
    });
    return out;
}

inline std::vector<RankedEntity> rank(const SiameseParams& p, const FeatureVector969& question,
                                      const std::vector<std::pair<Candidate, FeatureVector969>>& candidates) {
    return rank_with([&](const FeatureVector969& x) { return forward(p, x); }, question, candidates);
}

namespace detail {
inline constexpr std::string_view kRerankMagic = "SKRR";

inline void write_matrix(binio::Writer& w, const Eigen::MatrixXd& m) {
    w.u32(static_cast<std::uint32_t>(m.rows()));
    w.u32(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) w.f64(m(i, j));
}

inline Eigen::MatrixXd read_matrix(binio::Reader& r, bool column = false) {
    const std::uint32_t rows = r.u32(), cols = r.u32();
    if (static_cast<std::size_t>(rows) * cols * 8 > r.remaining())
        throw FormatVersionError("reranker matrix exceeds payload (truncated?)");
    if (column && cols != 1) throw FormatVersionError("reranker bias is not a column vector");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = r.f64();
    return m;
}
}  // namespace detail

inline std::string serialize_params(const SiameseParams& p) {
    binio::Writer w(detail::kRerankMagic);
    detail::write_matrix(w, p.w1);
    detail::write_matrix(w, p.b1);
    detail::write_matrix(w, p.w2);
    detail::write_matrix(w, p.b2);
    return w.bytes();
}

inline void save_params(const SiameseParams& p, const std::string& path) {
    const std::string bytes = serialize_params(p);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for '" + path + "'");
}

inline SiameseParams load_params(const std::string& path) {
    binio::Reader r = binio::Reader::open(path, detail::kRerankMagic);
    SiameseParams p;
    p.w1 = detail::read_matrix(r);
    p.b1 = detail::read_matrix(r, true);
    p.w2 = detail::read_matrix(r);
    p.b2 = detail::read_matrix(r, true);
    r.expect_end();
    if (p.w1.cols() != static_cast<Eigen::Index>(kFeatureDim) || p.b1.size() != p.w1.rows() ||
        p.w2.cols() != p.w1.rows() || p.b2.size() != p.w2.rows())
        throw FormatVersionError(path + ": inconsistent reranker layer shapes");
    if (!p.all_finite()) throw FormatVersionError(path + ": non-finite reranker parameter");
    return p;
}

}  // namespace scholink
