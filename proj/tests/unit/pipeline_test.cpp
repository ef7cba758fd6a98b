#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "synthetic.hpp"

using namespace scholink;
using namespace std::chrono_literals;

namespace {

class FixedDetector final : public SpanDetector {
public:
    explicit FixedDetector(std::vector<SpanPrediction> spans) : spans_(std::move(spans)) {}
    std::vector<SpanPrediction> detect(std::string_view) const override { return spans_; }

private:
    std::vector<SpanPrediction> spans_;
};

class FailingDetector final : public SpanDetector {
public:
    std::vector<SpanPrediction> detect(std::string_view) const override {
        throw RemoteUnavailable("http://span.invalid/", "down");
    }
};

// Two people share the name "John Smith"; everyone else is unique.
std::shared_ptr<const LabelIndex> homonym_index() {
    static const auto idx = std::make_shared<const LabelIndex>(build_index(EntityStore({
        {"https://dblp.org/pid/js1", "John Smith", {}, EntityType::person()},
        {"https://dblp.org/pid/js2", "John Smith", {}, EntityType::person()},
        {"https://dblp.org/pid/jr", "Jane Roe", {}, EntityType::person()},
        {"https://dblp.org/pid/av", "Ashish Vaswani", {}, EntityType::person()},
        {"https://dblp.org/rec/a", "Attention Is All You Need", {}, EntityType::publication()},
        {"https://dblp.org/rec/b", "Attention Is Not All You Need", {}, EntityType::publication()},
    })));
    return idx;
}

Resources homonym_resources() {
    Resources res = synth::make_resources(homonym_index(), 5, 16, 8);
    return res;
}

LinkRequest request(const std::string& q, LinkMode mode, EmbeddingKind kind = EmbeddingKind::TransE) {
    return LinkRequest{q, "lexicon", kind, mode, 10};
}

std::vector<std::string> uris(const std::vector<RankedEntity>& r) {
    std::vector<std::string> out;
    for (const auto& e : r) out.push_back(e.uri);
    return out;
}

}  // namespace

TEST(Modes, NamesRoundTrip) {
    for (LinkMode m : kLinkModes) EXPECT_EQ(parse_link_mode(to_string(m)), m);
    EXPECT_EQ(parse_link_mode("Hard-Disambiguation"), LinkMode::HardDisambiguation);
    EXPECT_FALSE(parse_link_mode("soft").has_value());
}

TEST(Combinations, CrossProductInStableOrder) {
    const auto c = available_combinations({"t5-small", "t5-base"},
                                          {EmbeddingKind::DistMult, EmbeddingKind::TransE, EmbeddingKind::ComplEx});
    ASSERT_EQ(c.size(), 6u);
    const std::vector<std::pair<SpanModelId, EmbeddingKind>> want = {
        {"t5-small", EmbeddingKind::TransE}, {"t5-small", EmbeddingKind::ComplEx}, {"t5-small", EmbeddingKind::DistMult},
        {"t5-base", EmbeddingKind::TransE},  {"t5-base", EmbeddingKind::ComplEx},  {"t5-base", EmbeddingKind::DistMult},
    };
    EXPECT_EQ(c, want);
    EXPECT_TRUE(available_combinations({"lexicon"}, {}).empty());
}

TEST(Combinations, FromResources) {
    Resources res = homonym_resources();
    EXPECT_EQ(available_combinations(res).size(), 3u);
    res.rerankers.erase(EmbeddingKind::ComplEx);
    EXPECT_EQ(available_combinations(res).size(), 2u);
}

TEST(Link, DistinctLabelsConditionalEqualsLabelSorting) {
    const Resources res = homonym_resources();
    const auto ls = link(request("Which papers did Ashish Vaswani publish?", LinkMode::LabelSorting), res);
    const auto cd = link(request("Which papers did Ashish Vaswani publish?", LinkMode::ConditionalDisambiguation), res);
    ASSERT_EQ(cd.spans.size(), 1u);
    EXPECT_FALSE(cd.spans[0].disambiguation_ran);
    EXPECT_EQ(cd.spans[0].scorer, Scorer::Lexical);
    EXPECT_EQ(cd.spans[0].ranked, ls.spans[0].ranked);
    EXPECT_EQ(cd.spans[0].top, ls.spans[0].top);
    EXPECT_EQ(cd.spans[0].top->uri, "https://dblp.org/pid/av");
    EXPECT_DOUBLE_EQ(cd.spans[0].top->distance, 0.0);
}

TEST(Link, NoSpansNoError) {
    const Resources res = homonym_resources();
    const auto r = link(request("What is the capital of France?", LinkMode::HardDisambiguation), res);
    EXPECT_TRUE(r.spans.empty());
    EXPECT_FALSE(r.has_errors());
}

TEST(Link, DuplicateLabelsRerankLikeDirectRank) {
    const Resources res = homonym_resources();
    const std::string q = "Which papers did John Smith publish?";
    const auto r = link(request(q, LinkMode::ConditionalDisambiguation, EmbeddingKind::ComplEx), res);
    ASSERT_EQ(r.spans.size(), 1u);
    const SpanResult& s = r.spans[0];
    EXPECT_TRUE(s.disambiguation_ran);
    EXPECT_EQ(s.scorer, Scorer::SiameseCosine);

    // The same steps done by hand.
    const auto candidates = res.index->search(s.span.label_text, s.span.etype, 10);
    ASSERT_TRUE(duplicate_label_exists(candidates));
    const HashEncoder enc;
    const KgEmbeddingSet& kg = *res.embeddings.at(EmbeddingKind::ComplEx);
    std::vector<std::pair<Candidate, FeatureVector969>> pairs;
    for (const Candidate& c : candidates) {
        const std::string& label = res.index->store().find(c.uri)->label;
        pairs.emplace_back(c, compose_entity(enc.encode(label), *kg.entity(c.uri), string_similarity(label, q)));
    }
    const auto want = rank(*res.rerankers.at(EmbeddingKind::ComplEx), compose_question(enc.encode(q)), pairs);
    EXPECT_EQ(s.ranked, want);
    EXPECT_EQ(*s.top, want.front());
}

TEST(Link, MissingKgVectorUsesZeroSlot) {
    Resources res = homonym_resources();
    KgEmbeddingSet sparse(EmbeddingKind::TransE, kKgDim);
    sparse.relations.add(synth::kAuthoredBy, std::vector<double>(kKgDim, 0.1));
    res.embeddings[EmbeddingKind::TransE] = std::make_shared<const KgEmbeddingSet>(sparse);
    const auto r = link(request("Did John Smith write it?", LinkMode::HardDisambiguation), res);
    ASSERT_EQ(r.spans.size(), 1u);
    EXPECT_FALSE(r.spans[0].error.has_value());
    EXPECT_TRUE(r.spans[0].disambiguation_ran);
    EXPECT_FALSE(r.spans[0].ranked.empty());
}

TEST(Link, AnyPairTrigger) {
    Resources res = homonym_resources();
    // Jane Roe ranks first and is unique; both John Smiths follow further down.
    res.detectors = {{"lexicon", std::make_shared<const FixedDetector>(
                                     std::vector<SpanPrediction>{{"Jane Roe", EntityType::person()}})}};
    const auto top_rule = link(request("q", LinkMode::ConditionalDisambiguation), res);
    EXPECT_FALSE(top_rule.spans[0].disambiguation_ran);
    res.options.trigger = TriggerRule::AnyPair;
    const auto any_rule = link(request("q", LinkMode::ConditionalDisambiguation), res);
    EXPECT_TRUE(any_rule.spans[0].disambiguation_ran);
}

TEST(Link, SpanSimilarityTargetChangesFeatures) {
    Resources res = homonym_resources();
    const std::string q = "Which papers did John Smith publish in 'Attention Is All You Need'?";
    const auto a = link(request(q, LinkMode::HardDisambiguation), res);
    res.options.similarity = SimilarityTarget::Span;
    const auto b = link(request(q, LinkMode::HardDisambiguation), res);
    ASSERT_EQ(a.spans.size(), b.spans.size());
    ASSERT_FALSE(a.spans.empty());
    // Same candidates, different similarity slot, so different distances.
    auto sorted = [](std::vector<std::string> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    EXPECT_EQ(sorted(uris(a.spans[0].ranked)), sorted(uris(b.spans[0].ranked)));
    EXPECT_NE(a.spans[0].ranked, b.spans[0].ranked);
}

TEST(Link, ValidationAndMissingResources) {
    Resources res = homonym_resources();
    EXPECT_THROW(link(request("  ", LinkMode::LabelSorting), res), UserError);
    LinkRequest zero = request("John Smith", LinkMode::LabelSorting);
    zero.k = 0;
    EXPECT_THROW(link(zero, res), InvalidK);
    LinkRequest unknown = request("John Smith", LinkMode::LabelSorting);
    unknown.span_model = "t5-large";
    EXPECT_THROW(link(unknown, res), ResourceMissing);
    res.embeddings.erase(EmbeddingKind::DistMult);
    EXPECT_THROW(link(request("John Smith", LinkMode::HardDisambiguation, EmbeddingKind::DistMult), res),
                 ResourceMissing);
    // Label sorting needs no embeddings.
    EXPECT_NO_THROW(link(request("John Smith", LinkMode::LabelSorting, EmbeddingKind::DistMult), res));
}

TEST(Link, DetectorFailureIsReported) {
    Resources res = homonym_resources();
    res.detectors = {{"lexicon", std::make_shared<const FailingDetector>()}};
    const auto r = link(request("John Smith", LinkMode::LabelSorting), res);
    ASSERT_TRUE(r.error.has_value());
    EXPECT_EQ(r.error->code, "remote_unavailable");
    EXPECT_TRUE(r.spans.empty());
}

TEST(Link, EncoderFailureIsolatedPerSpan) {
    Resources res = homonym_resources();
    res.encoder = std::make_shared<const RemoteEncoder>(fixture::kDeadEndpoint, 500ms);
    const auto r = link(request("Did Ashish Vaswani and John Smith ever write a paper together?",
                                LinkMode::ConditionalDisambiguation),
                        res);
    ASSERT_EQ(r.spans.size(), 2u);
    EXPECT_FALSE(r.spans[0].error.has_value());
    ASSERT_TRUE(r.spans[0].top.has_value());
    EXPECT_EQ(r.spans[0].top->uri, "https://dblp.org/pid/av");
    ASSERT_TRUE(r.spans[1].error.has_value());
    EXPECT_EQ(r.spans[1].error->code, "remote_unavailable");
    EXPECT_TRUE(r.spans[1].ranked.empty());
    EXPECT_TRUE(r.has_errors());
}

TEST(LinkProperties, ModeEquivalenceAndPermutation) {
    const synth::Kg kg = synth::make_kg({.persons = 120, .publications = 150, .venues = 4, .homonyms = 20, .seed = 41});
    const auto idx = synth::make_index(kg);
    const Resources res = synth::make_resources(idx, 9, 16, 8);
    for (const auto& q : synth::make_questions(kg, 120, 77)) {
        const auto ls = link(request(q.question, LinkMode::LabelSorting), res);
        const auto cd = link(request(q.question, LinkMode::ConditionalDisambiguation), res);
        const auto hd = link(request(q.question, LinkMode::HardDisambiguation), res);
        ASSERT_EQ(ls.spans.size(), cd.spans.size());
        ASSERT_EQ(ls.spans.size(), hd.spans.size());
        for (std::size_t i = 0; i < ls.spans.size(); ++i) {
            const auto candidates = idx->search(ls.spans[i].span.label_text, ls.spans[i].span.etype, 10);
            if (!duplicate_label_exists(candidates)) {
                EXPECT_FALSE(cd.spans[i].disambiguation_ran);
                EXPECT_EQ(cd.spans[i].ranked, ls.spans[i].ranked);
                EXPECT_EQ(cd.spans[i].top, ls.spans[i].top);
            } else {
                EXPECT_TRUE(cd.spans[i].disambiguation_ran);
            }
            auto a = uris(hd.spans[i].ranked), b = uris(ls.spans[i].ranked);
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            EXPECT_EQ(a, b);
            for (const auto* s : {&ls.spans[i], &cd.spans[i], &hd.spans[i]}) {
                if (s->ranked.empty()) continue;
                EXPECT_EQ(s->top, s->ranked.front());
                for (std::size_t j = 1; j < s->ranked.size(); ++j)
                    EXPECT_LE(s->ranked[j - 1].distance, s->ranked[j].distance);
            }
        }
    }
}

TEST(LinkProperties, Deterministic) {
    const Resources res = homonym_resources();
    for (LinkMode m : kLinkModes) {
        const auto a = link(request("Did John Smith and Jane Roe write 'Attention Is All You Need'?", m), res);
        const auto b = link(request("Did John Smith and Jane Roe write 'Attention Is All You Need'?", m), res);
        EXPECT_EQ(a.spans, b.spans);
        EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
    }
}

TEST(Json, ShapeRoundingAndTiming) {
    const Resources res = homonym_resources();
    const auto r = link(request("Did John Smith write it?", LinkMode::HardDisambiguation), res);
    const auto j = to_json(r);
    EXPECT_FALSE(j.contains("elapsed_ms"));
    EXPECT_TRUE(to_json(r, true).contains("elapsed_ms"));
    EXPECT_EQ(j["request"]["mode"], "hard");
    ASSERT_EQ(j["spans"].size(), 1u);
    const auto& span = j["spans"][0];
    EXPECT_EQ(span["scorer"], "siamese_cosine");
    EXPECT_EQ(span["top"], span["ranked"][0]);
    for (const auto& e : span["ranked"]) {
        const double d = e["distance"].get<double>();
        EXPECT_EQ(d, std::round(d * 1e6) / 1e6);
        EXPECT_EQ(e["url"], e["uri"]);
    }
    EXPECT_EQ(wire_distance(0.12345649), 0.123456);
}
