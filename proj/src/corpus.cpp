#include "mbd/corpus.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mbd/error.hpp"

namespace mbd {

using nlohmann::json;

const char* to_string(Source s) {
    switch (s) {
    case Source::FoxNews: return "fox-news";
    case Source::Nyt: return "nyt";
    case Source::HuffPost: return "huffpost";
    default: return "other";
    }
}

const char* to_string(RawLabel l) {
    switch (l) {
    case RawLabel::Left: return "left";
    case RawLabel::Center: return "center";
    default: return "right";
    }
}

const char* to_string(Label l) { return l == Label::Bias ? "bias" : "neutral"; }

const char* to_string(BiasType t) {
    switch (t) {
    case BiasType::Lexical: return "lexical";
    case BiasType::Informational: return "informational";
    default: return "any";
    }
}

Source source_from_string(const std::string& s) {
    if (s == "fox-news") return Source::FoxNews;
    if (s == "nyt") return Source::Nyt;
    if (s == "huffpost") return Source::HuffPost;
    if (s == "other") return Source::Other;
    throw ValidationError("unknown source: '" + s + "'");
}

RawLabel raw_label_from_string(const std::string& s) {
    if (s == "left") return RawLabel::Left;
    if (s == "center") return RawLabel::Center;
    if (s == "right") return RawLabel::Right;
    throw ValidationError("unknown raw_label: '" + s + "'");
}

BiasType bias_type_from_string(const std::string& s) {
    if (s == "lexical") return BiasType::Lexical;
    if (s == "informational") return BiasType::Informational;
    if (s == "any") return BiasType::Any;
    throw ValidationError("unknown bias_type: '" + s + "'");
}

std::string Article::full_text() const {
    std::string out;
    for (const Sentence& s : sentences) {
        if (!out.empty()) out += ' ';
        out += s.text;
    }
    return out;
}

std::map<std::string, std::vector<std::string>> Corpus::events() const {
    std::map<std::string, std::vector<std::string>> by_event;
    for (const Article& a : articles) by_event[a.event_id].push_back(a.id);
    return by_event;
}

const Article* Corpus::find(const std::string& id) const {
    for (const Article& a : articles)
        if (a.id == id) return &a;
    return nullptr;
}

bool Corpus::overlaid_with(BiasType t) const {
    return std::find(overlaid_types.begin(), overlaid_types.end(), t) != overlaid_types.end();
}

namespace {

json parse_line(const std::string& line, std::size_t line_no) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
        throw ParseError("line " + std::to_string(line_no) + ": not valid JSON");
    if (!j.is_object())
        throw ParseError("line " + std::to_string(line_no) + ": expected a JSON object");
    return j;
}

template <typename T>
T require(const json& j, const char* key, std::size_t line_no) {
    auto it = j.find(key);
    if (it == j.end())
        throw ParseError("line " + std::to_string(line_no) + ": missing field '" + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": field '" + key + "' has the wrong type");
    }
}

Article article_from_json(const json& j, std::size_t line_no) {
    Article a;
    a.id = require<std::string>(j, "id", line_no);
    a.source = source_from_string(require<std::string>(j, "source", line_no));
    a.event_id = require<std::string>(j, "event_id", line_no);
    a.raw_label = raw_label_from_string(require<std::string>(j, "raw_label", line_no));
    a.label = label_from_raw(a.raw_label);
    if (!j.contains("sentences") || !j.at("sentences").is_array())
        throw ParseError("line " + std::to_string(line_no) + ": missing or invalid 'sentences'");
    const json& sents = j.at("sentences");
    int index = 0;
    for (const json& sj : sents) {
        Sentence s;
        s.index = index++;
        s.text = require<std::string>(sj, "text", line_no);
        s.lexical_bias = require<bool>(sj, "lexical_bias", line_no);
        s.informational_bias = require<bool>(sj, "informational_bias", line_no);
        a.sentences.push_back(std::move(s));
    }
    if (a.sentences.empty())
        throw ValidationError("article '" + a.id + "' has no sentences (line " +
                              std::to_string(line_no) + ")");
    return a;
}

} // namespace

Corpus parse_corpus(std::istream& in) {
    Corpus corpus;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = parse_line(line, line_no);
        if (first && j.contains("_meta")) {
            first = false;
            try {
                if (j.contains("predictions_overlaid"))
                    for (const json& t : j.at("predictions_overlaid"))
                        corpus.overlaid_types.push_back(
                            bias_type_from_string(t.get<std::string>()));
            } catch (const json::exception&) {
                throw ParseError("line " + std::to_string(line_no) + ": malformed meta record");
            }
            continue;
        }
        first = false;
        Article a = article_from_json(j, line_no);
        if (!seen.insert(a.id).second)
            throw ValidationError("duplicate article id '" + a.id + "' (line " +
                                  std::to_string(line_no) + ")");
        corpus.articles.push_back(std::move(a));
    }
    return corpus;
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
    if (!corpus.overlaid_types.empty()) {
        json meta{{"_meta", 1}};
        json types = json::array();
        for (BiasType t : corpus.overlaid_types) types.push_back(to_string(t));
        meta["predictions_overlaid"] = types;
        out << meta.dump() << '\n';
    }
    for (const Article& a : corpus.articles) {
        json sents = json::array();
        for (const Sentence& s : a.sentences)
            sents.push_back({{"text", s.text},
                             {"lexical_bias", s.lexical_bias},
                             {"informational_bias", s.informational_bias}});
        json j{{"id", a.id},
               {"source", to_string(a.source)},
               {"event_id", a.event_id},
               {"raw_label", to_string(a.raw_label)},
               {"sentences", sents}};
        out << j.dump() << '\n';
    }
}

std::uint64_t corpus_fingerprint(const Corpus& corpus) {
    std::ostringstream buf;
    write_corpus(corpus, buf);
    const std::string bytes = buf.str();
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

std::vector<int> bias_sequence(const Article& article, BiasType bt) {
    if (article.sentences.empty())
        throw ValidationError("article '" + article.id + "' has no sentences");
    std::vector<int> seq;
    seq.reserve(article.sentences.size());
    for (const Sentence& s : article.sentences) seq.push_back(s.has_bias(bt) ? 1 : 0);
    return seq;
}

std::vector<PredictionRecord> parse_predictions(std::istream& in) {
    std::vector<PredictionRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = parse_line(line, line_no);
        PredictionRecord r;
        r.article_id = require<std::string>(j, "article_id", line_no);
        r.sentence_index = require<int>(j, "sentence_index", line_no);
        r.type = bias_type_from_string(require<std::string>(j, "bias_type", line_no));
        r.predicted = require<bool>(j, "predicted", line_no);
        if (j.contains("score")) r.score = require<double>(j, "score", line_no);
        records.push_back(std::move(r));
    }
    return records;
}

void write_predictions(const std::vector<PredictionRecord>& records, std::ostream& out) {
    for (const PredictionRecord& r : records) {
        json j{{"article_id", r.article_id},
               {"sentence_index", r.sentence_index},
               {"bias_type", to_string(r.type)},
               {"predicted", r.predicted}};
        if (r.score) j["score"] = *r.score;
        out << j.dump() << '\n';
    }
}

Corpus overlay_predictions(const Corpus& corpus, const std::vector<PredictionRecord>& records,
                           CoverageReport* report) {
    Corpus out = corpus;
    for (Article& a : out.articles)
        for (Sentence& s : a.sentences) {
            s.lexical_bias = false;
            s.informational_bias = false;
        }

    std::unordered_map<std::string, Article*> by_id;
    for (Article& a : out.articles) by_id[a.id] = &a;

    // addressed (article, sentence) -> bitmask of record types seen
    enum { kLex = 1, kInfo = 2, kAny = 4 };
    std::map<std::pair<std::string, int>, int> addressed;
    std::set<BiasType> types_seen;

    for (const PredictionRecord& r : records) {
        auto it = by_id.find(r.article_id);
        if (it == by_id.end())
            throw ValidationError("prediction for unknown article '" + r.article_id + "'");
        Article& a = *it->second;
        if (r.sentence_index < 0 || r.sentence_index >= static_cast<int>(a.sentences.size()))
            throw ValidationError("prediction for article '" + r.article_id +
                                  "' addresses nonexistent sentence index " +
                                  std::to_string(r.sentence_index));
        int bit = r.type == BiasType::Lexical ? kLex
                : r.type == BiasType::Informational ? kInfo
                                                    : kAny;
        int& mask = addressed[{r.article_id, r.sentence_index}];
        if (mask & bit)
            throw ValidationError("duplicate prediction for article '" + r.article_id +
                                  "' sentence " + std::to_string(r.sentence_index) + " type " +
                                  to_string(r.type));
        if ((bit == kAny && mask != 0) || (bit != kAny && (mask & kAny)))
            throw ValidationError("conflicting predictions for article '" + r.article_id +
                                  "' sentence " + std::to_string(r.sentence_index) +
                                  ": type 'any' cannot be combined with a specific type");
        mask |= bit;
        types_seen.insert(r.type);

        Sentence& s = a.sentences[r.sentence_index];
        switch (r.type) {
        case BiasType::Lexical: s.lexical_bias = r.predicted; break;
        case BiasType::Informational: s.informational_bias = r.predicted; break;
        default:
            s.lexical_bias = r.predicted;
            s.informational_bias = r.predicted;
        }
    }

    out.overlaid_types.assign(types_seen.begin(), types_seen.end());

    if (report) {
        *report = CoverageReport{};
        for (const Article& a : out.articles) report->total_sentences += a.sentences.size();
        for (const auto& [key, mask] : addressed) {
            if (mask & (kLex | kAny)) ++report->addressed_lexical;
            if (mask & (kInfo | kAny)) ++report->addressed_informational;
        }
    }
    return out;
}

Corpus overlay_predictions(const Corpus& corpus, std::istream& records, CoverageReport* report) {
    return overlay_predictions(corpus, parse_predictions(records), report);
}

double CoverageReport::lexical_coverage() const {
    return total_sentences == 0 ? 0.0
                                : static_cast<double>(addressed_lexical) / total_sentences;
}

double CoverageReport::informational_coverage() const {
    return total_sentences == 0 ? 0.0
                                : static_cast<double>(addressed_informational) / total_sentences;
}

double CoverageReport::coverage() const {
    return total_sentences == 0
               ? 0.0
               : static_cast<double>(addressed_lexical + addressed_informational) /
                     (2.0 * total_sentences);
}

} // namespace mbd
