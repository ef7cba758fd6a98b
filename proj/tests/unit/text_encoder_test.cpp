#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "json.hpp"
#include "synthetic.hpp"

using namespace scholink;
using namespace std::chrono_literals;

namespace {

double norm(const TextEmbedding768& e) {
    double s = 0;
    for (double x : e.values()) s += x * x;
    return std::sqrt(s);
}

// Echoes vector i as (i, 0, 0, ...) so order can be checked; replies with
// `length` components per vector.
void bind_index_echo(httplib::Server& s, std::size_t length) {
    s.Post("/encode", [length](const httplib::Request& req, httplib::Response& res) {
        const auto j = nlohmann::json::parse(req.body);
        nlohmann::json vecs = nlohmann::json::array();
        for (std::size_t i = 0; i < j["texts"].size(); ++i) {
            std::vector<double> v(length, 0.0);
            if (!v.empty()) v[0] = static_cast<double>(i);
            vecs.push_back(v);
        }
        res.set_content(nlohmann::json{{"vectors", vecs}}.dump(), "application/json");
    });
}

}  // namespace

TEST(HashEncoder, Deterministic) {
    const HashEncoder enc;
    EXPECT_EQ(enc.encode("abc"), enc.encode("abc"));
    EXPECT_EQ(enc.encode("Attention  Is All"), enc.encode("attention is all"));
}

TEST(HashEncoder, UnitNormAndFinite) {
    const HashEncoder enc;
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        const std::string t = synth::make_title(rng);
        const auto e = enc.encode(t);
        EXPECT_EQ(e.values().size(), kTextDim);
        EXPECT_NEAR(norm(e), 1.0, 1e-9);
        for (double x : e.values()) EXPECT_TRUE(std::isfinite(x));
    }
    EXPECT_NEAR(norm(enc.encode("a")), 1.0, 1e-9);
}

TEST(HashEncoder, EmptyTextRejected) {
    const HashEncoder enc;
    EXPECT_THROW(enc.encode(""), EmptyText);
    EXPECT_THROW(enc.encode("  \t"), EmptyText);
}

TEST(HashEncoder, BatchEqualsSingles) {
    const HashEncoder enc;
    const std::vector<std::string> texts = {"one", "two words", "Ashish Vaswani"};
    const auto batch = enc.batch_encode(texts);
    ASSERT_EQ(batch.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(batch[i], enc.encode(texts[i]));
}

TEST(HashEncoder, BatchEmptyEntryTagged) {
    const HashEncoder enc;
    try {
        enc.batch_encode({"fine", "", "also fine"});
        FAIL() << "expected EmptyText";
    } catch (const EmptyText& e) {
        EXPECT_TRUE(e.has_index());
        EXPECT_EQ(e.index(), 1u);
    }
}

TEST(HashEncoderProperties, DistinctStringsRarelyCollide) {
    const HashEncoder enc;
    std::mt19937_64 rng(2);
    std::set<std::string> strings;
    while (strings.size() < 10000) strings.insert(synth::make_word(rng) + " " + synth::make_word(rng));
    std::set<std::vector<double>> vectors;
    for (const auto& s : strings) {
        const auto v = enc.encode(s).values();
        vectors.emplace(v.begin(), v.end());
    }
    EXPECT_GE(vectors.size(), 9900u);
}

TEST(TextEmbedding, ValidatesLengthAndFiniteness) {
    EXPECT_THROW(TextEmbedding768(std::vector<double>(767, 0.0)), BadRemoteVector);
    std::vector<double> v(768, 0.0);
    v[3] = std::nan("");
    EXPECT_THROW(TextEmbedding768{v}, BadRemoteVector);
}

TEST(RemoteEncoder, RequiresAbsoluteUrl) {
    EXPECT_THROW(RemoteEncoder("localhost:8080/encode", 1s), ConfigError);
    EXPECT_NO_THROW(RemoteEncoder("http://localhost:8080/encode", 1s));
}

TEST(RemoteEncoder, ShortVectorIsBadRemoteVector) {
    fixture::LocalServer server([](httplib::Server& s) { bind_index_echo(s, 767); });
    const RemoteEncoder enc(server.url("/encode"), 5s);
    EXPECT_THROW(enc.encode("abc"), BadRemoteVector);
}

TEST(RemoteEncoder, BatchOrderPreserved) {
    fixture::LocalServer server([](httplib::Server& s) { bind_index_echo(s, 768); });
    const RemoteEncoder enc(server.url("/encode"), 5s);
    std::vector<std::string> texts;
    for (int i = 0; i < 100; ++i) texts.push_back("text " + std::to_string(i));
    const auto out = enc.batch_encode(texts);
    ASSERT_EQ(out.size(), 100u);
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i][0], static_cast<double>(i));
}

TEST(RemoteEncoder, StubMatchesHashEncoder) {
    fixture::LocalServer server([](httplib::Server& s) { bind_encoder_stub(s); });
    const RemoteEncoder enc(server.url("/encode"), 5s);
    const HashEncoder local;
    const auto out = enc.batch_encode({"Ashish Vaswani", "attention is all you need"});
    EXPECT_EQ(out[0], local.encode("Ashish Vaswani"));
    EXPECT_EQ(out[1], local.encode("attention is all you need"));
}

TEST(RemoteEncoder, UnreachableIsRemoteUnavailable) {
    const RemoteEncoder enc(fixture::kDeadEndpoint, 1s);
    try {
        enc.encode("abc");
        FAIL() << "expected RemoteUnavailable";
    } catch (const RemoteUnavailable& e) {
        EXPECT_EQ(e.endpoint(), fixture::kDeadEndpoint);
    }
}

TEST(RemoteEncoder, EmptyTextCheckedBeforeNetwork) {
    const RemoteEncoder enc(fixture::kDeadEndpoint, 1s);
    EXPECT_THROW(enc.batch_encode({"a", " "}), EmptyText);
}
