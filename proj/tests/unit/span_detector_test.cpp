#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "json.hpp"
#include "synthetic.hpp"

using namespace scholink;
using namespace std::chrono_literals;

namespace {

std::shared_ptr<const LabelIndex> vaswani_index() {
    static const auto idx = std::make_shared<const LabelIndex>(build_index(EntityStore({
        {"https://dblp.org/pid/1", "Ashish Vaswani", {}, EntityType::person()},
        {"https://dblp.org/pid/2", "Noam Shazeer", {"N. Shazeer"}, EntityType::person()},
        {"https://dblp.org/rec/a", "Attention Is All You Need", {}, EntityType::publication()},
        {"https://dblp.org/streams/nips", "Neural Information Processing", {}, EntityType::other("Stream")},
    })));
    return idx;
}

void bind_fixed_output(httplib::Server& s, std::string output) {
    s.Post("/detect", [output](const httplib::Request& req, httplib::Response& res) {
        const auto j = nlohmann::json::parse(req.body);
        if (!j.contains("model") || !j.contains("question")) {
            res.status = 400;
            return;
        }
        res.set_content(nlohmann::json{{"output", output}}.dump(), "application/json");
    });
}

}  // namespace

TEST(ParseOutput, TwoSpans) {
    const auto spans = parse_model_output("Ashish Vaswani [person] | Attention is all you need [publication]");
    ASSERT_EQ(spans.size(), 2u);
    EXPECT_EQ(spans[0], (SpanPrediction{"Ashish Vaswani", EntityType::person()}));
    EXPECT_EQ(spans[1], (SpanPrediction{"Attention is all you need", EntityType::publication()}));
}

TEST(ParseOutput, EmptyIsNoSpans) {
    EXPECT_TRUE(parse_model_output("").empty());
    EXPECT_TRUE(parse_model_output("   ").empty());
}

TEST(ParseOutput, UnknownTypeRejected) {
    try {
        parse_model_output("Ashish Vaswani [author]");
        FAIL() << "expected SpanParseError";
    } catch (const SpanParseError& e) {
        EXPECT_EQ(e.code(), "span_parse_error");
        EXPECT_EQ(e.position(), 15u);
    }
}

TEST(ParseOutput, MalformedSegments) {
    EXPECT_THROW(parse_model_output("Ashish Vaswani"), SpanParseError);
    EXPECT_THROW(parse_model_output("[person]"), SpanParseError);
    EXPECT_THROW(parse_model_output("A [person] | | B [person]"), SpanParseError);
    EXPECT_THROW(parse_model_output("A [person] |"), SpanParseError);
    EXPECT_EQ(parse_model_output("  a  [ PERSON ]  ")[0], (SpanPrediction{"a", EntityType::person()}));
}

TEST(SerializeSpans, RejectsReservedCharacters) {
    EXPECT_THROW(serialize_spans({{"a|b", EntityType::person()}}), LabelSyntaxError);
    EXPECT_THROW(serialize_spans({{"a [b", EntityType::person()}}), LabelSyntaxError);
    EXPECT_THROW(serialize_spans({{"venue", EntityType::other("Stream")}}), UserError);
    EXPECT_EQ(serialize_spans({}), "");
}

TEST(SpanProperties, GrammarRoundTrip) {
    std::mt19937_64 rng(21);
    const std::string alphabet = "abcXYZ 019.,:;'\"()-";
    for (int i = 0; i < 500; ++i) {
        std::vector<SpanPrediction> spans;
        const std::size_t n = rng() % 5;
        for (std::size_t j = 0; j < n; ++j) {
            std::string label;
            const std::size_t len = 1 + rng() % 12;
            for (std::size_t c = 0; c < len; ++c) label += alphabet[rng() % alphabet.size()];
            label = text::trim(label);
            if (label.empty()) label = "x";
            spans.push_back({label, rng() % 2 ? EntityType::person() : EntityType::publication()});
        }
        EXPECT_EQ(parse_model_output(serialize_spans(spans)), spans);
    }
}

TEST(Lexicon, QuotedTitleBecomesPublication) {
    const auto spans = detect_lexicon(vaswani_index(), "When was 'Attention is all you need' published?");
    ASSERT_EQ(spans.size(), 1u);
    EXPECT_EQ(spans[0], (SpanPrediction{"Attention is all you need", EntityType::publication()}));
}

TEST(Lexicon, IndexedPersonMatched) {
    const auto spans = detect_lexicon(vaswani_index(), "Who were the co-authors of Ashish Vaswani in that paper?");
    ASSERT_EQ(spans.size(), 1u);
    EXPECT_EQ(spans[0], (SpanPrediction{"ashish vaswani", EntityType::person()}));
}

TEST(Lexicon, NoHitsNoSpans) {
    EXPECT_TRUE(detect_lexicon(vaswani_index(), "What is the capital of France?").empty());
}

TEST(Lexicon, PersonAndQuotedTitleInQuestionOrder) {
    const auto spans = detect_lexicon(
        vaswani_index(), "Who were the co-authors of Ashish Vaswani in the paper \"Attention Is All You Need\"?");
    ASSERT_EQ(spans.size(), 2u);
    EXPECT_EQ(spans[0].etype, EntityType::person());
    EXPECT_EQ(spans[1].etype, EntityType::publication());
    EXPECT_EQ(spans[1].label_text, "Attention Is All You Need");
}

TEST(Lexicon, TrailingPunctuationAndPossessivesTolerated) {
    const auto a = detect_lexicon(vaswani_index(), "Which papers did Noam Shazeer?");
    ASSERT_EQ(a.size(), 1u);
    EXPECT_EQ(a[0].label_text, "noam shazeer");
    const auto b = detect_lexicon(vaswani_index(), "Is Ashish Vaswani's work cited by N. Shazeer?");
    ASSERT_EQ(b.size(), 1u);
    EXPECT_EQ(b[0].label_text, "n. shazeer");
}

TEST(Lexicon, OtherTypesNeverPredicted) {
    EXPECT_TRUE(detect_lexicon(vaswani_index(), "Papers at Neural Information Processing").empty());
}

TEST(LexiconProperties, DeterministicOrderedTyped) {
    const synth::Kg kg = synth::make_kg({.persons = 80, .publications = 120, .venues = 4, .seed = 13});
    const auto idx = synth::make_index(kg);
    for (const auto& q : synth::make_questions(kg, 200, 5)) {
        const auto a = detect_lexicon(idx, q.question);
        EXPECT_EQ(a, detect_lexicon(idx, q.question));
        EXPECT_FALSE(a.empty()) << q.question;
        // Spans do not overlap and appear in question order.
        const std::string lower = text::normalize(q.question);
        std::size_t cursor = 0;
        for (const auto& s : a) {
            EXPECT_TRUE(s.etype == EntityType::person() || s.etype == EntityType::publication());
            const std::size_t at = lower.find(text::normalize(s.label_text), cursor);
            ASSERT_NE(at, std::string::npos) << q.question;
            cursor = at + text::normalize(s.label_text).size();
        }
    }
}

TEST(Remote, StubOutputParsed) {
    fixture::LocalServer server([](httplib::Server& s) {
        bind_fixed_output(s, "Ashish Vaswani [person] | Attention is all you need [publication]");
    });
    const auto spans = detect_remote(server.url("/detect"), "t5-small", "any question", 5s);
    ASSERT_EQ(spans.size(), 2u);
    EXPECT_EQ(spans[0].label_text, "Ashish Vaswani");
}

TEST(Remote, MalformedOutputCarriesRaw) {
    fixture::LocalServer server([](httplib::Server& s) { bind_fixed_output(s, "Ashish Vaswani (person)"); });
    try {
        detect_remote(server.url("/detect"), "t5-small", "q", 5s);
        FAIL() << "expected SpanParseError";
    } catch (const SpanParseError& e) {
        EXPECT_EQ(e.raw(), "Ashish Vaswani (person)");
    }
}

TEST(Remote, TimeoutIsRemoteUnavailable) {
    fixture::LocalServer server([](httplib::Server& s) {
        s.Post("/detect", [](const httplib::Request&, httplib::Response& res) {
            std::this_thread::sleep_for(800ms);
            res.set_content(R"({"output":""})", "application/json");
        });
    });
    EXPECT_THROW(detect_remote(server.url("/detect"), "t5-small", "q", 200ms), RemoteUnavailable);
}

TEST(Remote, UnreachableAndBadStatus) {
    EXPECT_THROW(detect_remote(fixture::kDeadEndpoint, "m", "q", 1s), RemoteUnavailable);
    fixture::LocalServer server([](httplib::Server& s) {
        s.Post("/detect", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    });
    EXPECT_THROW(detect_remote(server.url("/detect"), "m", "q", 5s), RemoteUnavailable);
    EXPECT_THROW(RemoteSpanDetector("not a url", "m", 1s), ConfigError);
}

TEST(Remote, SpanStubAnswersInGrammar) {
    fixture::LocalServer server([](httplib::Server& s) { bind_span_stub(s, vaswani_index()); });
    const auto spans = detect_remote(server.url("/detect"), "stub",
                                     "Who were the co-authors of Ashish Vaswani in 'Attention Is All You Need'?", 5s);
    EXPECT_EQ(spans, detect_lexicon(vaswani_index(),
                                    "Who were the co-authors of Ashish Vaswani in 'Attention Is All You Need'?"));
}
