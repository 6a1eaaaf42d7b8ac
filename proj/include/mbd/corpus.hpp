#ifndef MBD_CORPUS_HPP
#define MBD_CORPUS_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace mbd {

enum class Source { FoxNews, Nyt, HuffPost, Other };
enum class RawLabel { Left, Center, Right };
enum class Label { Neutral = 0, Bias = 1 };
enum class BiasType { Lexical, Informational, Any };

const char* to_string(Source s);
const char* to_string(RawLabel l);
const char* to_string(Label l);
const char* to_string(BiasType t);
Source source_from_string(const std::string& s);
RawLabel raw_label_from_string(const std::string& s);
BiasType bias_type_from_string(const std::string& s);

// An article is biased iff its raw orientation is left or right.
inline Label label_from_raw(RawLabel raw) {
    return raw == RawLabel::Center ? Label::Neutral : Label::Bias;
}

struct Sentence {
    int index = 0; // 0-based, contiguous within the article
    std::string text;
    bool lexical_bias = false;
    bool informational_bias = false;

    bool has_bias(BiasType t) const {
        switch (t) {
        case BiasType::Lexical: return lexical_bias;
        case BiasType::Informational: return informational_bias;
        default: return lexical_bias || informational_bias;
        }
    }
    bool operator==(const Sentence&) const = default;
};

struct Article {
    std::string id;
    Source source = Source::Other;
    std::string event_id;
    RawLabel raw_label = RawLabel::Center;
    Label label = Label::Neutral;
    std::vector<Sentence> sentences;

    std::string full_text() const; // sentences joined by single spaces
    bool operator==(const Article&) const = default;
};

// Immutable after construction; safe to share across workers.
struct Corpus {
    std::vector<Article> articles;
    // Set when the sentence flags were replaced by external predictions;
    // lists the bias types the predictions covered.
    std::vector<BiasType> overlaid_types;

    // event id -> article ids, in corpus order
    std::map<std::string, std::vector<std::string>> events() const;
    const Article* find(const std::string& id) const;
    bool overlaid_with(BiasType t) const;
};

// One JSON object per line; see docs/formats.md for the schema.
Corpus parse_corpus(std::istream& in);
void write_corpus(const Corpus& corpus, std::ostream& out);

// FNV-1a over the canonical serialization.
std::uint64_t corpus_fingerprint(const Corpus& corpus);

// b_i = 1 iff sentence i carries the selected bias type.
std::vector<int> bias_sequence(const Article& article, BiasType bt);

struct PredictionRecord {
    std::string article_id;
    int sentence_index = 0;
    BiasType type = BiasType::Any;
    bool predicted = false;
    std::optional<double> score;
};

struct CoverageReport {
    std::size_t total_sentences = 0;
    std::size_t addressed_lexical = 0;
    std::size_t addressed_informational = 0;

    double lexical_coverage() const;
    double informational_coverage() const;
    double coverage() const; // over both flag channels
};

std::vector<PredictionRecord> parse_predictions(std::istream& in);
void write_predictions(const std::vector<PredictionRecord>& records, std::ostream& out);

// Replaces the corpus annotation by the prediction stream: every flag is
// reset to false, then the addressed (article, sentence, type) entries are
// set. A record of type Any writes both flags; mixing Any with a specific
// type on the same sentence is rejected as conflicting.
Corpus overlay_predictions(const Corpus& corpus, const std::vector<PredictionRecord>& records,
                           CoverageReport* report = nullptr);
Corpus overlay_predictions(const Corpus& corpus, std::istream& records,
                           CoverageReport* report = nullptr);

} // namespace mbd

#endif
