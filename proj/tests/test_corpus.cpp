#include <doctest.h>

#include <sstream>

#include "mbd/corpus.hpp"
#include "mbd/error.hpp"
#include "synthetic.hpp"

using namespace mbd;
using namespace mbd::testing;

namespace {

const char* kTwoArticles = R"({"id":"a1","source":"fox-news","event_id":"e1","raw_label":"right","sentences":[{"text":"First.","lexical_bias":true,"informational_bias":false},{"text":"Second.","lexical_bias":false,"informational_bias":true}]}
{"id":"a2","source":"nyt","event_id":"e1","raw_label":"center","sentences":[{"text":"Only.","lexical_bias":false,"informational_bias":false}]}
)";

Corpus parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse_corpus(in);
}

} // namespace

TEST_CASE("raw labels fold into the binary article label") {
    Corpus corpus = parse_string(kTwoArticles);
    REQUIRE(corpus.articles.size() == 2);
    CHECK(corpus.articles[0].label == Label::Bias);    // right -> bias
    CHECK(corpus.articles[1].label == Label::Neutral); // center -> neutral
    CHECK(label_from_raw(RawLabel::Left) == Label::Bias);
}

TEST_CASE("duplicate article ids are rejected with the id named") {
    std::string doubled = std::string(kTwoArticles) + R"({"id":"a1","source":"other","event_id":"e9","raw_label":"left","sentences":[{"text":"x","lexical_bias":false,"informational_bias":false}]})" + "\n";
    CHECK_THROWS_WITH_AS(parse_string(doubled), doctest::Contains("a1"), ValidationError);
}

TEST_CASE("unknown raw_label is rejected") {
    CHECK_THROWS_AS(
        parse_string(R"({"id":"a","source":"nyt","event_id":"e","raw_label":"up","sentences":[{"text":"x","lexical_bias":false,"informational_bias":false}]})"),
        ValidationError);
}

TEST_CASE("malformed lines report the line number") {
    std::string bad = std::string(kTwoArticles) + "{not json\n";
    CHECK_THROWS_WITH_AS(parse_string(bad), doctest::Contains("line 3"), ParseError);
}

TEST_CASE("articles without sentences are rejected at parse time") {
    CHECK_THROWS_AS(
        parse_string(R"({"id":"a","source":"nyt","event_id":"e","raw_label":"center","sentences":[]})"),
        ValidationError);
}

TEST_CASE("bias_sequence projects the requested flag") {
    Article a = make_article("x", "e", RawLabel::Right, {1, 0}, {0, 0});
    CHECK(bias_sequence(a, BiasType::Lexical) == std::vector<int>{1, 0});
    CHECK(bias_sequence(a, BiasType::Any) == std::vector<int>{1, 0});

    Article b = make_article("y", "e", RawLabel::Right, {0, 1}, {1, 1});
    CHECK(bias_sequence(b, BiasType::Any) == std::vector<int>{1, 1});
    CHECK_THROWS_AS(bias_sequence(Article{}, BiasType::Any), ValidationError);
}

TEST_CASE("any is the union of lexical and informational everywhere") {
    Corpus corpus = random_corpus(40, 99);
    for (const Article& a : corpus.articles) {
        std::vector<int> lex = bias_sequence(a, BiasType::Lexical);
        std::vector<int> info = bias_sequence(a, BiasType::Informational);
        std::vector<int> any = bias_sequence(a, BiasType::Any);
        for (std::size_t i = 0; i < any.size(); ++i)
            CHECK(any[i] == (lex[i] | info[i]));
    }
}

TEST_CASE("corpus round-trips through its serialization") {
    Corpus corpus = random_corpus(25, 4242);
    std::ostringstream out;
    write_corpus(corpus, out);
    Corpus again = parse_string(out.str());
    REQUIRE(again.articles.size() == corpus.articles.size());
    CHECK(again.articles == corpus.articles);
    CHECK(corpus_fingerprint(again) == corpus_fingerprint(corpus));
}

TEST_CASE("fingerprint reacts to content changes") {
    Corpus corpus = random_corpus(10, 1);
    std::uint64_t before = corpus_fingerprint(corpus);
    corpus.articles[0].sentences[0].lexical_bias =
        !corpus.articles[0].sentences[0].lexical_bias;
    CHECK(corpus_fingerprint(corpus) != before);
}

TEST_CASE("events map groups article ids") {
    Corpus corpus = parse_string(kTwoArticles);
    auto events = corpus.events();
    REQUIRE(events.count("e1") == 1);
    CHECK(events["e1"] == std::vector<std::string>{"a1", "a2"});
}

TEST_CASE("overlay replaces a flag") {
    Corpus corpus = parse_string(kTwoArticles);
    std::istringstream preds(
        R"({"article_id":"a2","sentence_index":0,"bias_type":"lexical","predicted":true})");
    Corpus out = overlay_predictions(corpus, preds);
    CHECK(out.articles[1].sentences[0].lexical_bias);
    // unaddressed flags reset to false
    CHECK_FALSE(out.articles[0].sentences[0].lexical_bias);
    CHECK_FALSE(out.articles[0].sentences[1].informational_bias);
    CHECK(out.overlaid_with(BiasType::Lexical));
    CHECK_FALSE(out.overlaid_with(BiasType::Any));
}

TEST_CASE("empty prediction stream clears all flags with zero coverage") {
    Corpus corpus = parse_string(kTwoArticles);
    CoverageReport coverage;
    Corpus out = overlay_predictions(corpus, {}, &coverage);
    for (const Article& a : out.articles)
        for (const Sentence& s : a.sentences) {
            CHECK_FALSE(s.lexical_bias);
            CHECK_FALSE(s.informational_bias);
        }
    CHECK(coverage.coverage() == 0.0);
    CHECK(coverage.total_sentences == 3);
}

TEST_CASE("overlay validates sentence addresses") {
    Corpus corpus = parse_string(kTwoArticles);
    std::istringstream preds(
        R"({"article_id":"a1","sentence_index":99,"bias_type":"lexical","predicted":true})");
    CHECK_THROWS_WITH_AS(overlay_predictions(corpus, preds),
                         doctest::Contains("99"), ValidationError);

    std::istringstream unknown(
        R"({"article_id":"zz","sentence_index":0,"bias_type":"lexical","predicted":true})");
    CHECK_THROWS_WITH_AS(overlay_predictions(corpus, unknown),
                         doctest::Contains("zz"), ValidationError);
}

TEST_CASE("duplicate prediction records are rejected") {
    Corpus corpus = parse_string(kTwoArticles);
    std::vector<PredictionRecord> records{
        {"a1", 0, BiasType::Lexical, true, {}},
        {"a1", 0, BiasType::Lexical, false, {}},
    };
    CHECK_THROWS_AS(overlay_predictions(corpus, records), ValidationError);
}

TEST_CASE("an any record writes both flags and conflicts with specific types") {
    Corpus corpus = parse_string(kTwoArticles);
    std::vector<PredictionRecord> records{{"a1", 0, BiasType::Any, true, 0.9}};
    CoverageReport coverage;
    Corpus out = overlay_predictions(corpus, records, &coverage);
    CHECK(out.articles[0].sentences[0].lexical_bias);
    CHECK(out.articles[0].sentences[0].informational_bias);
    CHECK(coverage.addressed_lexical == 1);
    CHECK(coverage.addressed_informational == 1);

    records.push_back({"a1", 0, BiasType::Lexical, false, {}});
    CHECK_THROWS_WITH_AS(overlay_predictions(corpus, records),
                         doctest::Contains("conflicting"), ValidationError);
}

TEST_CASE("overlaid corpora keep their marker across serialization") {
    Corpus corpus = parse_string(kTwoArticles);
    std::vector<PredictionRecord> records{{"a1", 0, BiasType::Lexical, true, {}},
                                          {"a2", 0, BiasType::Informational, false, {}}};
    Corpus out = overlay_predictions(corpus, records);
    std::ostringstream buffer;
    write_corpus(out, buffer);
    Corpus again = parse_string(buffer.str());
    CHECK(again.overlaid_with(BiasType::Lexical));
    CHECK(again.overlaid_with(BiasType::Informational));
    CHECK(again.articles == out.articles);
}

TEST_CASE("prediction files round-trip") {
    std::vector<PredictionRecord> records{{"a1", 0, BiasType::Lexical, true, 0.75},
                                          {"a2", 0, BiasType::Any, false, {}}};
    std::ostringstream out;
    write_predictions(records, out);
    std::istringstream in(out.str());
    std::vector<PredictionRecord> again = parse_predictions(in);
    REQUIRE(again.size() == 2);
    CHECK(again[0].article_id == "a1");
    CHECK(again[0].score == 0.75);
    CHECK(again[1].type == BiasType::Any);
    CHECK_FALSE(again[1].predicted);
}
