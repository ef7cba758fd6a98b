#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "synthetic.hpp"

using namespace scholink;

namespace {

using Vec = std::vector<double>;

double s(EmbeddingKind k, const Vec& h, const Vec& r, const Vec& t) { return score(k, h, r, t); }

Vec random_vec(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec v(n);
    for (double& x : v) x = u(rng);
    return v;
}

EmbedTrainConfig toy_config() {
    EmbedTrainConfig cfg;
    cfg.dim = 32;
    cfg.epochs = 200;
    cfg.seed = 42;
    return cfg;
}

}  // namespace

TEST(EmbeddingKindNames, ParseAndPrint) {
    EXPECT_EQ(parse_embedding_kind("TransE"), EmbeddingKind::TransE);
    EXPECT_EQ(parse_embedding_kind("complex"), EmbeddingKind::ComplEx);
    EXPECT_EQ(parse_embedding_kind("DISTMULT"), EmbeddingKind::DistMult);
    EXPECT_FALSE(parse_embedding_kind("rotate").has_value());
    EXPECT_EQ(to_string(EmbeddingKind::ComplEx), "complex");
}

TEST(Score, HandComputedValues) {
    EXPECT_EQ(s(EmbeddingKind::TransE, {1, 0}, {0, 1}, {1, 1}), 0.0);
    EXPECT_EQ(s(EmbeddingKind::TransE, {0, 0}, {0, 0}, {3, 4}), -5.0);
    EXPECT_EQ(s(EmbeddingKind::DistMult, {1, 2}, {1, 1}, {3, 1}), 5.0);
    // h = i, r = 1, t = i, stored as (re, im).
    EXPECT_EQ(s(EmbeddingKind::ComplEx, {0, 1}, {1, 0}, {0, 1}), 1.0);
}

TEST(Score, RejectsMismatchedLengths) {
    EXPECT_THROW(s(EmbeddingKind::DistMult, {1, 2}, {1}, {1, 2}), DimensionMismatch);
    EXPECT_THROW(s(EmbeddingKind::ComplEx, {1, 2, 3}, {1, 2, 3}, {1, 2, 3}), DimensionMismatch);
}

TEST(ScoreProperties, DistMultSymmetric) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        const Vec h = random_vec(rng, 16), r = random_vec(rng, 16), t = random_vec(rng, 16);
        EXPECT_EQ(s(EmbeddingKind::DistMult, h, r, t), s(EmbeddingKind::DistMult, t, r, h));
    }
}

TEST(ScoreProperties, ComplExReducesToDistMultWhenReal) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
        const Vec h = random_vec(rng, 8), r = random_vec(rng, 8), t = random_vec(rng, 8);
        auto pad = [](const Vec& v) {
            Vec out = v;
            out.resize(2 * v.size(), 0.0);
            return out;
        };
        EXPECT_NEAR(s(EmbeddingKind::ComplEx, pad(h), pad(r), pad(t)), s(EmbeddingKind::DistMult, h, r, t), 1e-12);
    }
}

TEST(ScoreProperties, ComplExSymmetricForRealRelation) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const Vec h = random_vec(rng, 16), t = random_vec(rng, 16);
        Vec r = random_vec(rng, 16);
        std::fill(r.begin() + 8, r.end(), 0.0);
        EXPECT_NEAR(s(EmbeddingKind::ComplEx, h, r, t), s(EmbeddingKind::ComplEx, t, r, h), 1e-12);
    }
}

TEST(ScoreProperties, TransENonPositiveAndZeroOnTranslation) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 200; ++i) {
        const Vec h = random_vec(rng, 10), r = random_vec(rng, 10), t = random_vec(rng, 10);
        EXPECT_LE(s(EmbeddingKind::TransE, h, r, t), 0.0);
        // Small integers keep h + r exact.
        Vec hi(10), ri(10), ti(10);
        for (std::size_t j = 0; j < 10; ++j) {
            hi[j] = static_cast<double>(static_cast<int>(rng() % 7) - 3);
            ri[j] = static_cast<double>(static_cast<int>(rng() % 7) - 3);
            ti[j] = hi[j] + ri[j];
        }
        EXPECT_EQ(s(EmbeddingKind::TransE, hi, ri, ti), 0.0);
        ti[0] += 1.0;
        EXPECT_LT(s(EmbeddingKind::TransE, hi, ri, ti), 0.0);
    }
}

TEST(Train, SameSeedBitIdentical) {
    const auto triples = synth::toy_kg();
    for (EmbeddingKind k : kEmbeddingKinds) {
        EmbedTrainConfig cfg = toy_config();
        cfg.epochs = 20;
        EXPECT_EQ(train_embeddings(triples, cfg, k), train_embeddings(triples, cfg, k)) << to_string(k);
        EmbedTrainConfig other = cfg;
        other.seed = 43;
        EXPECT_FALSE(train_embeddings(triples, cfg, k) == train_embeddings(triples, other, k));
    }
}

TEST(Train, ToyLossDecreases) {
    const auto triples = synth::toy_kg();
    ASSERT_EQ(triples.size(), 200u);
    for (EmbeddingKind k : kEmbeddingKinds) {
        EmbedTrainReport rep;
        const KgEmbeddingSet set = train_embeddings(triples, toy_config(), k, &rep);
        ASSERT_EQ(rep.epoch_mean_loss.size(), 200u);
        EXPECT_LT(rep.epoch_mean_loss.back(), rep.epoch_mean_loss.front()) << to_string(k);
        EXPECT_EQ(set.entities.size(), 50u);
        EXPECT_EQ(set.relations.size(), 5u);
        EXPECT_NO_THROW(set.validate());
    }
}

TEST(Train, TransEToyHitsAtOne) {
    const auto triples = synth::toy_kg();
    const KgEmbeddingSet set = train_embeddings(triples, toy_config(), EmbeddingKind::TransE);
    const LinkPredictionResult lp = evaluate_link_prediction(set, triples);
    EXPECT_EQ(lp.queries, 200u);
    EXPECT_GE(lp.hits_at_1, 0.9);
}

TEST(Train, TransEEntitiesStayUnitNorm) {
    EmbedTrainConfig cfg = toy_config();
    cfg.epochs = 5;
    const KgEmbeddingSet set = train_embeddings(synth::toy_kg(), cfg, EmbeddingKind::TransE);
    for (std::size_t i = 0; i < set.entities.size(); ++i) {
        double n = 0;
        for (double x : set.entities.row(i)) n += x * x;
        EXPECT_NEAR(std::sqrt(n), 1.0, 1e-9);
    }
}

TEST(Train, NoEntityTriplesRejected) {
    const std::vector<Triple> literals = {synth::literal_triple("http://a", synth::kLabel, "A")};
    EXPECT_THROW(train_embeddings(literals, toy_config(), EmbeddingKind::TransE), NoTrainableTriples);
    EXPECT_THROW(train_embeddings({}, toy_config(), EmbeddingKind::DistMult), NoTrainableTriples);
}

TEST(Train, ConfigValidated) {
    EmbedTrainConfig cfg = toy_config();
    cfg.epochs = 0;
    EXPECT_THROW(train_embeddings(synth::toy_kg(), cfg, EmbeddingKind::TransE), ConfigError);
    cfg = toy_config();
    cfg.learning_rate = 0;
    EXPECT_THROW(train_embeddings(synth::toy_kg(), cfg, EmbeddingKind::TransE), ConfigError);
    cfg = toy_config();
    cfg.dim = 31;
    EXPECT_THROW(train_embeddings(synth::toy_kg(), cfg, EmbeddingKind::ComplEx), DimensionMismatch);
}

TEST(GradCheck, DistMultAndComplExLogistic) {
    std::mt19937_64 rng(7);
    for (EmbeddingKind k : {EmbeddingKind::DistMult, EmbeddingKind::ComplEx}) {
        for (int i = 0; i < 20; ++i) {
            const GradPoint p = sample_grad_point(k, 16, rng);
            EXPECT_LT(grad_check(k, p, 1e-5), 1e-4) << to_string(k);
        }
    }
}

TEST(GradCheck, TransEActiveMargin) {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 20; ++i) {
        const GradPoint p = sample_grad_point(EmbeddingKind::TransE, 16, rng);
        EXPECT_GT(grad_point_loss(EmbeddingKind::TransE, p), 0.0);
        EXPECT_LT(grad_check(EmbeddingKind::TransE, p, 1e-5), 1e-4);
    }
}

TEST(GradCheck, InactiveHingeHasZeroGradient) {
    GradPoint p;
    p.h = {0, 0};
    p.r = {0, 0};
    p.t = {0, 0};        // positive distance 0
    p.neg_h = {0, 0};
    p.neg_t = {10, 0};   // negative distance 10, far past the margin
    p.margin = 1.0;
    EXPECT_EQ(grad_point_loss(EmbeddingKind::TransE, p), 0.0);
    for (double g : grad_point_gradient(EmbeddingKind::TransE, p)) EXPECT_EQ(g, 0.0);
}

TEST(GradCheck, NonPositiveStepRejected) {
    std::mt19937_64 rng(9);
    const GradPoint p = sample_grad_point(EmbeddingKind::DistMult, 4, rng);
    EXPECT_THROW(grad_check(EmbeddingKind::DistMult, p, 0.0), ConfigError);
}

TEST(Persist, RoundTripBitForBit) {
    fixture::TempDir dir("embed");
    EmbedTrainConfig cfg = toy_config();
    cfg.epochs = 10;
    for (EmbeddingKind k : kEmbeddingKinds) {
        const KgEmbeddingSet set = train_embeddings(synth::toy_kg(), cfg, k);
        const std::string path = (dir / (to_string(k) + ".skem")).string();
        save_embeddings(set, path);
        EXPECT_EQ(load_embeddings(path), set);
        EXPECT_EQ(load_embeddings(path, k), set);
    }
}

TEST(Persist, KindMismatch) {
    fixture::TempDir dir("embed");
    EmbedTrainConfig cfg = toy_config();
    cfg.epochs = 1;
    const std::string path = (dir / "t.skem").string();
    save_embeddings(train_embeddings(synth::toy_kg(), cfg, EmbeddingKind::TransE), path);
    EXPECT_THROW(load_embeddings(path, EmbeddingKind::ComplEx), KindMismatch);
}

TEST(Persist, TruncatedPayload) {
    fixture::TempDir dir("embed");
    KgEmbeddingSet set(EmbeddingKind::DistMult, 200);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 4; ++i) set.entities.add("http://e/" + std::to_string(i), random_vec(rng, 200));
    set.relations.add("http://r", random_vec(rng, 200));
    const std::string bytes = serialize_embeddings(set);
    fixture::write_file(dir / "t", bytes.substr(0, bytes.size() - 100));
    EXPECT_THROW(load_embeddings((dir / "t").string()), FormatVersionError);
}

TEST(Tsv, ExportImportExact) {
    std::mt19937_64 rng(6);
    VectorTable t(5);
    for (int i = 0; i < 10; ++i) t.add("http://e/" + std::to_string(i), random_vec(rng, 5));
    std::stringstream ss;
    export_tsv(t, ss);
    EXPECT_EQ(import_tsv(ss), t);
}

TEST(Tsv, RejectsBadRows) {
    std::istringstream ragged("a\t1\t2\nb\t1\n");
    EXPECT_THROW(import_tsv(ragged), ParseError);
    std::istringstream junk("a\t1\tzz\n");
    EXPECT_THROW(import_tsv(junk), ParseError);
    std::istringstream wrong_dim("a\t1\t2\n");
    EXPECT_THROW(import_tsv(wrong_dim, 3), DimensionMismatch);
}
