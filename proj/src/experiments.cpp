#include "mbd/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "mbd/config.hpp"
#include "mbd/error.hpp"
#include "mbd/parallel.hpp"
#include "mbd/rng.hpp"

namespace mbd {

using nlohmann::json;

const char* to_string(SplitMode m) {
    return m == SplitMode::WithEvent ? "with-event" : "without-event";
}

SplitMode split_mode_from_string(const std::string& s) {
    if (s == "with-event") return SplitMode::WithEvent;
    if (s == "without-event") return SplitMode::WithoutEvent;
    throw ValidationError("unknown split mode: '" + s + "'");
}

namespace {

struct SplitSizes {
    std::size_t train, validation, test;
};

SplitSizes target_sizes(std::size_t n) {
    // 60/20/20; exact 180/60/60 on a 300-article corpus
    std::size_t train = static_cast<std::size_t>(std::llround(0.6 * static_cast<double>(n)));
    std::size_t validation = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(n)));
    if (train + validation >= n) throw ValidationError("split: corpus too small");
    return {train, validation, n - train - validation};
}

void sort_ids(Split& split) {
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.validation.begin(), split.validation.end());
    std::sort(split.test.begin(), split.test.end());
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

} // namespace

Split split_random(const Corpus& corpus, std::uint64_t seed) {
    if (corpus.articles.size() < 5)
        throw ValidationError("split_random: need at least 5 articles");
    const SplitSizes sizes = target_sizes(corpus.articles.size());
    std::vector<std::string> ids;
    ids.reserve(corpus.articles.size());
    for (const Article& a : corpus.articles) ids.push_back(a.id);
    Rng rng(seed);
    rng.shuffle(ids);

    Split split;
    split.mode = SplitMode::WithEvent;
    split.seed = seed;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i < sizes.train)
            split.train.push_back(ids[i]);
        else if (i < sizes.train + sizes.validation)
            split.validation.push_back(ids[i]);
        else
            split.test.push_back(ids[i]);
    }
    sort_ids(split);
    return split;
}

Split split_by_event(const Corpus& corpus, std::uint64_t seed) {
    if (corpus.articles.size() < 5)
        throw ValidationError("split_by_event: need at least 5 articles");
    const SplitSizes sizes = target_sizes(corpus.articles.size());
    const auto by_event = corpus.events();
    std::vector<std::string> event_ids;
    event_ids.reserve(by_event.size());
    for (const auto& [event, ids] : by_event) {
        if (ids.size() > sizes.train)
            throw ValidationError("split_by_event: event '" + event +
                                  "' is larger than the training target");
        event_ids.push_back(event);
    }
    Rng rng(seed);
    rng.shuffle(event_ids);

    Split split;
    split.mode = SplitMode::WithoutEvent;
    split.seed = seed;
    std::size_t assigned = 0;
    for (const std::string& event : event_ids) {
        const std::vector<std::string>& ids = by_event.at(event);
        std::vector<std::string>* dest;
        if (split.train.size() < sizes.train)
            dest = &split.train;
        else if (split.validation.size() < sizes.validation)
            dest = &split.validation;
        else
            dest = &split.test;
        dest->insert(dest->end(), ids.begin(), ids.end());
        assigned += ids.size();
    }
    (void)assigned;
    if (split.validation.empty() || split.test.empty())
        throw ValidationError("split_by_event: events too coarse to fill all three sets");
    sort_ids(split);
    return split;
}

void write_split(const Split& split, std::ostream& out) {
    json j{{"format", "mbdetect-split"},
           {"version", 1},
           {"mode", to_string(split.mode)},
           {"seed", split.seed},
           {"train", split.train},
           {"validation", split.validation},
           {"test", split.test}};
    out << j.dump(2) << '\n';
}

Split read_split(std::istream& in) {
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.value("format", "") != "mbdetect-split")
        throw ParseError("not a split file");
    try {
        Split split;
        split.mode = split_mode_from_string(j.at("mode").get<std::string>());
        split.seed = j.at("seed").get<std::uint64_t>();
        split.train = j.at("train").get<std::vector<std::string>>();
        split.validation = j.at("validation").get<std::vector<std::string>>();
        split.test = j.at("test").get<std::vector<std::string>>();
        return split;
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid split file: ") + e.what());
    }
}

SplitView apply_split(const Corpus& corpus, const Split& split) {
    auto contains = [](const std::vector<std::string>& ids, const std::string& id) {
        return std::binary_search(ids.begin(), ids.end(), id);
    };
    SplitView view;
    for (const Article& a : corpus.articles) {
        if (contains(split.train, a.id))
            view.train.push_back(&a);
        else if (contains(split.validation, a.id))
            view.validation.push_back(&a);
        else if (contains(split.test, a.id))
            view.test.push_back(&a);
    }
    const std::size_t expected = split.train.size() + split.validation.size() + split.test.size();
    const std::size_t found = view.train.size() + view.validation.size() + view.test.size();
    if (found != expected)
        throw ValidationError("apply_split: split references articles missing from the corpus");
    return view;
}

Metrics evaluate(const std::vector<int>& predictions, const std::vector<int>& gold) {
    if (predictions.size() != gold.size())
        throw ValidationError("evaluate: prediction/gold length mismatch");
    if (predictions.empty()) throw ValidationError("evaluate: empty inputs");
    double tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == 1) {
            (gold[i] == 1 ? tp : fp) += 1;
        } else {
            (gold[i] == 1 ? fn : tn) += 1;
        }
    }
    Metrics m;
    m.accuracy = (tp + tn) / static_cast<double>(predictions.size());
    m.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    m.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

const char* to_string(PipelineKind k) {
    switch (k) {
    case PipelineKind::Majority: return "majority";
    case PipelineKind::NgramSvm: return "ngram-svm";
    case PipelineKind::NgramLogReg: return "ngram-logreg";
    case PipelineKind::SentenceNgramSvm: return "sentence-ngram-svm";
    case PipelineKind::SentenceNgramLogReg: return "sentence-ngram-logreg";
    case PipelineKind::FabsSvm: return "fabs-svm";
    case PipelineKind::FrelSvm: return "frel-svm";
    case PipelineKind::PositionNb: return "position-nb";
    case PipelineKind::PositionSvm: return "position-svm";
    case PipelineKind::SequenceMarkov: return "sequence-markov";
    case PipelineKind::SequenceSvm: return "sequence-svm";
    case PipelineKind::StackFP: return "stack-fp";
    case PipelineKind::StackFS: return "stack-fs";
    case PipelineKind::StackPS: return "stack-ps";
    default: return "stack-fps";
    }
}

PipelineKind pipeline_from_string(const std::string& s) {
    for (PipelineKind k :
         {PipelineKind::Majority, PipelineKind::NgramSvm, PipelineKind::NgramLogReg,
          PipelineKind::SentenceNgramSvm, PipelineKind::SentenceNgramLogReg, PipelineKind::FabsSvm,
          PipelineKind::FrelSvm, PipelineKind::PositionNb, PipelineKind::PositionSvm,
          PipelineKind::SequenceMarkov, PipelineKind::SequenceSvm, PipelineKind::StackFP,
          PipelineKind::StackFS, PipelineKind::StackPS, PipelineKind::StackFPS})
        if (s == to_string(k)) return k;
    throw ValidationError("unknown pipeline: '" + s + "'");
}

bool is_stacking(PipelineKind k) {
    return k == PipelineKind::StackFP || k == PipelineKind::StackFS ||
           k == PipelineKind::StackPS || k == PipelineKind::StackFPS;
}

bool is_sentence_level(PipelineKind k) {
    return k == PipelineKind::SentenceNgramSvm || k == PipelineKind::SentenceNgramLogReg;
}

namespace {

bool uses_position_axes(PipelineKind k) {
    return k == PipelineKind::PositionNb || k == PipelineKind::PositionSvm ||
           k == PipelineKind::SequenceMarkov || k == PipelineKind::SequenceSvm;
}

bool uses_order_axis(PipelineKind k) {
    return k == PipelineKind::SequenceMarkov || k == PipelineKind::SequenceSvm;
}

bool uses_svm_axes(PipelineKind k) {
    switch (k) {
    case PipelineKind::Majority:
    case PipelineKind::PositionNb:
    case PipelineKind::SequenceMarkov: return false;
    default: return true;
    }
}

bool uses_ngram_axes(PipelineKind k) {
    return k == PipelineKind::NgramSvm || k == PipelineKind::NgramLogReg || is_sentence_level(k);
}

} // namespace

std::string GridPoint::describe(PipelineKind kind) const {
    std::ostringstream out;
    bool first = true;
    auto field = [&](const std::string& name, const std::string& value) {
        if (!first) out << ' ';
        first = false;
        out << name << '=' << value;
    };
    if (uses_position_axes(kind)) {
        field("method", to_string(method));
        field("k", std::to_string(k));
        field("L", std::to_string(component_count));
    }
    if (uses_order_axis(kind)) field("order", std::to_string(order));
    if (uses_svm_axes(kind)) {
        std::ostringstream c;
        c << cost;
        field("C", c.str());
        field("weights", balanced ? "balanced" : "uniform");
    }
    if (uses_ngram_axes(kind)) field("counts", ngram_binary ? "binary" : "raw");
    if (first) out << "-";
    return out.str();
}

int FittedPipeline::predict_article(const Article& article) const {
    switch (kind) {
    case PipelineKind::Majority: return 1;
    case PipelineKind::PositionNb: return nb_classify(*pm, bias_sequence(article, bias_type)) ==
                                                   Label::Bias
                                               ? 1
                                               : 0;
    case PipelineKind::SequenceMarkov:
        return markov_classify(*tm, *pm, bias_sequence(article, bias_type)) == Label::Bias ? 1 : 0;
    default: return score_article(article) >= 0.0 ? 1 : 0;
    }
}

double FittedPipeline::score_article(const Article& article) const {
    switch (kind) {
    case PipelineKind::Majority: return 1.0;
    case PipelineKind::NgramSvm:
    case PipelineKind::NgramLogReg:
        return decision(*linear, featurize(*vocab, article.full_text(), hyper.ngram_binary));
    case PipelineKind::FabsSvm: {
        FrequencyFeatures f = frequency_features(bias_sequence(article, bias_type));
        return decision(*linear, {{0, static_cast<double>(f.f_abs)}});
    }
    case PipelineKind::FrelSvm: {
        FrequencyFeatures f = frequency_features(bias_sequence(article, bias_type));
        return decision(*linear, {{0, f.f_rel}});
    }
    case PipelineKind::PositionNb: {
        const std::vector<int> seq = bias_sequence(article, bias_type);
        return nb_log_score(*pm, seq, 1) - nb_log_score(*pm, seq, 0);
    }
    case PipelineKind::PositionSvm:
        return decision(*linear, dense_features(position_feature_vector(
                                     *pm, bias_sequence(article, bias_type))));
    case PipelineKind::SequenceMarkov: {
        const std::vector<int> seq = bias_sequence(article, bias_type);
        return markov_log_score(*tm, *pm, seq, 1) - markov_log_score(*tm, *pm, seq, 0);
    }
    case PipelineKind::SequenceSvm:
        return decision(*linear, dense_features(sequence_feature_vector(
                                     *tm, *pm, bias_sequence(article, bias_type))));
    case PipelineKind::SentenceNgramSvm:
    case PipelineKind::SentenceNgramLogReg:
        throw ValidationError("sentence-level pipeline cannot score whole articles");
    default: return stack->decision_score(bias_sequence(article, bias_type));
    }
}

int FittedPipeline::predict_text(const std::string& text) const {
    return score_text(text) >= 0.0 ? 1 : 0;
}

double FittedPipeline::score_text(const std::string& text) const {
    if (!is_sentence_level(kind))
        throw ValidationError("pipeline is not sentence-level");
    return decision(*linear, featurize(*vocab, text, hyper.ngram_binary));
}

namespace {

std::vector<BaseFamily> stack_bases(PipelineKind kind) {
    switch (kind) {
    case PipelineKind::StackFP: return {BaseFamily::Frequency, BaseFamily::Position};
    case PipelineKind::StackFS: return {BaseFamily::Frequency, BaseFamily::Sequence};
    case PipelineKind::StackPS: return {BaseFamily::Position, BaseFamily::Sequence};
    default: return {BaseFamily::Frequency, BaseFamily::Position, BaseFamily::Sequence};
    }
}

TrainConfig svm_config(const GridPoint& point, const std::vector<int>& y, int epochs,
                       std::uint64_t seed) {
    TrainConfig cfg;
    cfg.cost = point.cost;
    cfg.epochs = epochs;
    cfg.seed = seed;
    if (point.balanced) cfg = balanced_weights(cfg, y);
    return cfg;
}

std::vector<int> article_labels(const std::vector<const Article*>& articles) {
    std::vector<int> y;
    y.reserve(articles.size());
    for (const Article* a : articles) y.push_back(a->label == Label::Bias ? 1 : 0);
    return y;
}

struct SentenceExample {
    const std::string* text;
    int label;
};

std::vector<SentenceExample> sentence_examples(const std::vector<const Article*>& articles,
                                               BiasType bt) {
    std::vector<SentenceExample> out;
    for (const Article* a : articles)
        for (const Sentence& s : a->sentences) out.push_back({&s.text, s.has_bias(bt) ? 1 : 0});
    return out;
}

} // namespace

FittedPipeline train_pipeline(PipelineKind kind, BiasType bt,
                              const std::vector<const Article*>& train, const GridPoint& point,
                              const PipelineTrainOptions& options, std::uint64_t seed) {
    if (train.empty()) throw ValidationError("train_pipeline: empty training split");
    FittedPipeline p;
    p.kind = kind;
    p.bias_type = bt;
    p.hyper = point;

    switch (kind) {
    case PipelineKind::Majority: break;
    case PipelineKind::NgramSvm:
    case PipelineKind::NgramLogReg: {
        std::vector<std::string> texts;
        texts.reserve(train.size());
        for (const Article* a : train) texts.push_back(a->full_text());
        p.vocab = build_vocab(texts, options.ngram_n_max, options.ngram_min_count);
        std::vector<FeatureVector> X;
        X.reserve(train.size());
        for (const std::string& t : texts) X.push_back(featurize(*p.vocab, t, point.ngram_binary));
        const std::vector<int> y = article_labels(train);
        p.linear = train_linear(X, y,
                                kind == PipelineKind::NgramSvm ? LinearKind::SvmHinge
                                                               : LinearKind::Logistic,
                                svm_config(point, y, options.epochs, seed));
        break;
    }
    case PipelineKind::SentenceNgramSvm:
    case PipelineKind::SentenceNgramLogReg: {
        const std::vector<SentenceExample> examples = sentence_examples(train, bt);
        std::vector<std::string> texts;
        texts.reserve(examples.size());
        for (const SentenceExample& e : examples) texts.push_back(*e.text);
        p.vocab = build_vocab(texts, options.ngram_n_max, options.ngram_min_count);
        std::vector<FeatureVector> X;
        std::vector<int> y;
        X.reserve(examples.size());
        y.reserve(examples.size());
        for (const SentenceExample& e : examples) {
            X.push_back(featurize(*p.vocab, *e.text, point.ngram_binary));
            y.push_back(e.label);
        }
        p.linear = train_linear(X, y,
                                kind == PipelineKind::SentenceNgramSvm ? LinearKind::SvmHinge
                                                                       : LinearKind::Logistic,
                                svm_config(point, y, options.epochs, seed));
        break;
    }
    case PipelineKind::FabsSvm:
    case PipelineKind::FrelSvm: {
        std::vector<FeatureVector> X;
        X.reserve(train.size());
        for (const Article* a : train) {
            FrequencyFeatures f = frequency_features(bias_sequence(*a, bt));
            X.push_back({{0, kind == PipelineKind::FabsSvm ? static_cast<double>(f.f_abs)
                                                           : f.f_rel}});
        }
        const std::vector<int> y = article_labels(train);
        p.linear =
            train_linear(X, y, LinearKind::SvmHinge, svm_config(point, y, options.epochs, seed));
        break;
    }
    case PipelineKind::PositionNb:
        p.pm = train_position_model(train, bt, point.k, point.component_count, point.method,
                                    derive_seed(seed, 1));
        break;
    case PipelineKind::PositionSvm: {
        p.pm = train_position_model(train, bt, point.k, point.component_count, point.method,
                                    derive_seed(seed, 1));
        std::vector<FeatureVector> X;
        X.reserve(train.size());
        for (const Article* a : train)
            X.push_back(dense_features(position_feature_vector(*p.pm, bias_sequence(*a, bt))));
        const std::vector<int> y = article_labels(train);
        p.linear =
            train_linear(X, y, LinearKind::SvmHinge, svm_config(point, y, options.epochs, seed));
        break;
    }
    case PipelineKind::SequenceMarkov:
        p.pm = train_position_model(train, bt, point.k, point.component_count, point.method,
                                    derive_seed(seed, 1));
        p.tm = train_transition_model(train, bt, *p.pm, point.order, derive_seed(seed, 2));
        break;
    case PipelineKind::SequenceSvm: {
        p.pm = train_position_model(train, bt, point.k, point.component_count, point.method,
                                    derive_seed(seed, 1));
        p.tm = train_transition_model(train, bt, *p.pm, point.order, derive_seed(seed, 2));
        std::vector<FeatureVector> X;
        X.reserve(train.size());
        for (const Article* a : train)
            X.push_back(dense_features(sequence_feature_vector(*p.tm, *p.pm, bias_sequence(*a, bt))));
        const std::vector<int> y = article_labels(train);
        p.linear =
            train_linear(X, y, LinearKind::SvmHinge, svm_config(point, y, options.epochs, seed));
        break;
    }
    default:
        throw ValidationError("train_pipeline: stacking pipelines are trained via run_table");
    }
    return p;
}

std::vector<PredictionRecord> predict_sentence_records(const FittedPipeline& pipeline,
                                                       const Corpus& corpus) {
    if (!is_sentence_level(pipeline.kind))
        throw ValidationError("predict_sentence_records: pipeline is not sentence-level");
    std::vector<PredictionRecord> records;
    for (const Article& a : corpus.articles)
        for (const Sentence& s : a.sentences) {
            PredictionRecord r;
            r.article_id = a.id;
            r.sentence_index = s.index;
            r.type = pipeline.bias_type;
            double score = pipeline.score_text(s.text);
            r.predicted = score >= 0.0;
            r.score = score;
            records.push_back(std::move(r));
        }
    return records;
}

namespace {

std::vector<GridPoint> grid_points(const GridSpec& spec, PipelineKind kind) {
    auto nonempty = [](const char* axis, std::size_t n) {
        if (n == 0) throw ValidationError(std::string("grid_search: empty axis '") + axis + "'");
    };
    nonempty("sampling", spec.sampling.size());
    nonempty("k", spec.k.size());
    nonempty("components", spec.component_counts.size());
    nonempty("order", spec.orders.size());
    nonempty("cost", spec.costs.size());
    nonempty("balanced", spec.balanced.size());
    nonempty("ngram_binary", spec.ngram_binary.size());

    const std::vector<Sampling> methods =
        uses_position_axes(kind) ? spec.sampling : std::vector<Sampling>{Sampling::Average};
    const std::vector<int> ks = uses_position_axes(kind) ? spec.k : std::vector<int>{0};
    const std::vector<int> ls =
        uses_position_axes(kind) ? spec.component_counts : std::vector<int>{0};
    const std::vector<int> orders = uses_order_axis(kind) ? spec.orders : std::vector<int>{0};
    const std::vector<double> costs = uses_svm_axes(kind) ? spec.costs : std::vector<double>{1.0};
    const std::vector<bool> balanced =
        uses_svm_axes(kind) ? spec.balanced : std::vector<bool>{false};
    const std::vector<bool> binary =
        uses_ngram_axes(kind) ? spec.ngram_binary : std::vector<bool>{false};

    std::vector<GridPoint> points;
    for (int k : ks)
        for (int L : ls)
            for (int order : orders) {
                if (uses_order_axis(kind) && order >= k) continue; // structurally invalid
                for (double cost : costs)
                    for (Sampling method : methods)
                        for (bool bal : balanced)
                            for (bool bin : binary)
                                points.push_back({method, k, L, order, cost, bal, bin});
            }
    if (points.empty()) throw ValidationError("grid_search: no valid grid points");
    // Canonical tie-break order: smaller (k, L, order, C) first.
    std::stable_sort(points.begin(), points.end(), [](const GridPoint& a, const GridPoint& b) {
        return std::tie(a.k, a.component_count, a.order, a.cost) <
               std::tie(b.k, b.component_count, b.order, b.cost);
    });
    return points;
}

double validation_accuracy(const FittedPipeline& pipeline,
                           const std::vector<const Article*>& validation, BiasType bt) {
    if (validation.empty()) return 0.0;
    double correct = 0.0;
    if (is_sentence_level(pipeline.kind)) {
        std::size_t total = 0;
        for (const Article* a : validation)
            for (const Sentence& s : a->sentences) {
                ++total;
                int want = s.has_bias(bt) ? 1 : 0;
                if (pipeline.predict_text(s.text) == want) correct += 1.0;
            }
        return total == 0 ? 0.0 : correct / static_cast<double>(total);
    }
    for (const Article* a : validation) {
        int want = a->label == Label::Bias ? 1 : 0;
        if (pipeline.predict_article(*a) == want) correct += 1.0;
    }
    return correct / static_cast<double>(validation.size());
}

} // namespace

GridResult grid_search(const GridSpec& spec, PipelineKind kind, const Corpus& corpus,
                       const Split& split, BiasType bt, const PipelineTrainOptions& options,
                       std::uint64_t seed, int jobs) {
    if (is_stacking(kind))
        throw ValidationError("grid_search: stacking rows derive their hyperparameters from "
                              "their base families");
    const SplitView view = apply_split(corpus, split);
    const std::vector<GridPoint> points = grid_points(spec, kind);

    std::vector<double> scores(points.size(), 0.0);
    parallel_for(points.size(), jobs, [&](std::size_t i) {
        FittedPipeline p =
            train_pipeline(kind, bt, view.train, points[i], options, derive_seed(seed, i));
        scores[i] = validation_accuracy(p, view.validation, bt);
    });

    std::size_t best = 0;
    for (std::size_t i = 1; i < points.size(); ++i)
        if (scores[i] > scores[best]) best = i;

    GridResult result;
    result.best = points[best];
    result.validation_accuracy = scores[best];
    result.table.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) result.table.push_back({points[i], scores[i]});
    result.model = std::make_shared<FittedPipeline>(
        train_pipeline(kind, bt, view.train, points[best], options, derive_seed(seed, best)));
    return result;
}

const char* to_string(ExperimentId id) {
    switch (id) {
    case ExperimentId::Q1WithEvent: return "q1-w-event";
    case ExperimentId::Q1WithoutEvent: return "q1-wo-event";
    case ExperimentId::Q2GroundTruth: return "q2-gt";
    case ExperimentId::Q3Predicted: return "q3-pr";
    default: return "q3-w-event";
    }
}

ExperimentId experiment_from_string(const std::string& s) {
    for (ExperimentId id : {ExperimentId::Q1WithEvent, ExperimentId::Q1WithoutEvent,
                            ExperimentId::Q2GroundTruth, ExperimentId::Q3Predicted,
                            ExperimentId::Q3WithEvent})
        if (s == to_string(id)) return id;
    throw ValidationError("unknown experiment: '" + s + "'");
}

namespace {

Metrics test_metrics(const FittedPipeline& pipeline, const std::vector<const Article*>& test) {
    std::vector<int> predictions, gold;
    predictions.reserve(test.size());
    gold.reserve(test.size());
    for (const Article* a : test) {
        predictions.push_back(pipeline.predict_article(*a));
        gold.push_back(a->label == Label::Bias ? 1 : 0);
    }
    return evaluate(predictions, gold);
}

void append_grid(RunReport& report, const std::string& row_key, const GridResult& grid) {
    for (const GridEntry& e : grid.table)
        report.grid.push_back({row_key, e.point, e.validation_accuracy});
}

// One grid-searched row of a Q2/Q3 table block.
ReportRow second_order_row(RunReport& report, PipelineKind kind, BiasType bt,
                           const Corpus& corpus, const Split& split, const RunConfig& cfg,
                           const std::string& feature, const std::string& classifier) {
    const std::string key = std::string(to_string(bt)) + "/" + to_string(kind);
    GridResult grid = grid_search(cfg.grid, kind, corpus, split, bt, cfg.train,
                                  derive_seed(cfg.seed, fnv1a(key)), cfg.jobs);
    append_grid(report, key, grid);
    ReportRow row;
    row.bias_type = to_string(bt);
    row.feature = feature;
    row.classifier = classifier;
    row.hyper = grid.best.describe(kind);
    row.validation_accuracy = grid.validation_accuracy;
    row.test = test_metrics(*grid.model, apply_split(corpus, split).test);
    row.model = grid.model;
    return row;
}

StackingOptions stacking_options(PipelineKind kind, const RunConfig& cfg, std::uint64_t seed,
                                 const std::vector<const Article*>& train,
                                 const GridResult& fabs, const GridResult& frel,
                                 const GridResult& position, const GridResult& sequence) {
    const std::vector<int> y = article_labels(train);
    StackingOptions opt;
    opt.bases = stack_bases(kind);
    opt.fabs_svm = svm_config(fabs.best, y, cfg.train.epochs, 0);
    opt.frel_svm = svm_config(frel.best, y, cfg.train.epochs, 0);
    opt.position.k = position.best.k;
    opt.position.component_count = position.best.component_count;
    opt.position.method = position.best.method;
    opt.position.svm = svm_config(position.best, y, cfg.train.epochs, 0);
    opt.sequence.k = sequence.best.k;
    opt.sequence.component_count = sequence.best.component_count;
    opt.sequence.method = sequence.best.method;
    opt.sequence.order = sequence.best.order;
    opt.sequence.svm = svm_config(sequence.best, y, cfg.train.epochs, 0);
    opt.meta_cost_grid = cfg.grid.costs;
    opt.epochs = cfg.train.epochs;
    opt.seed = seed;
    return opt;
}

void run_second_order_block(RunReport& report, BiasType bt, const Corpus& corpus,
                            const Split& split, const RunConfig& cfg) {
    const SplitView view = apply_split(corpus, split);

    const std::string bt_name = to_string(bt);
    ReportRow fabs = second_order_row(report, PipelineKind::FabsSvm, bt, corpus, split, cfg,
                                      "f_abs", "svm");
    ReportRow frel = second_order_row(report, PipelineKind::FrelSvm, bt, corpus, split, cfg,
                                      "f_rel", "svm");
    ReportRow pos_nb = second_order_row(report, PipelineKind::PositionNb, bt, corpus, split, cfg,
                                        "bias-position", "naive-bayes");
    ReportRow pos_svm = second_order_row(report, PipelineKind::PositionSvm, bt, corpus, split,
                                         cfg, "bias-position", "svm");
    ReportRow seq_markov = second_order_row(report, PipelineKind::SequenceMarkov, bt, corpus,
                                            split, cfg, "bias-sequence", "markov");
    ReportRow seq_svm = second_order_row(report, PipelineKind::SequenceSvm, bt, corpus, split,
                                         cfg, "bias-sequence", "svm");

    // The stacking rows reuse the winning hyperparameters of their bases.
    GridResult fabs_grid{fabs.model->hyper, fabs.validation_accuracy, {}, fabs.model};
    GridResult frel_grid{frel.model->hyper, frel.validation_accuracy, {}, frel.model};
    GridResult pos_grid{pos_svm.model->hyper, pos_svm.validation_accuracy, {}, pos_svm.model};
    GridResult seq_grid{seq_svm.model->hyper, seq_svm.validation_accuracy, {}, seq_svm.model};

    report.rows.push_back(std::move(fabs));
    report.rows.push_back(std::move(frel));
    report.rows.push_back(std::move(pos_nb));
    report.rows.push_back(std::move(pos_svm));
    report.rows.push_back(std::move(seq_markov));
    report.rows.push_back(std::move(seq_svm));

    const std::map<PipelineKind, std::string> stack_names{
        {PipelineKind::StackFP, "F+P"},
        {PipelineKind::StackFS, "F+S"},
        {PipelineKind::StackPS, "P+S"},
        {PipelineKind::StackFPS, "F+P+S"}};
    for (const auto& [kind, feature] : stack_names) {
        const std::string key = bt_name + "/" + to_string(kind);
        const std::uint64_t seed = derive_seed(cfg.seed, fnv1a(key));
        StackingOptions opt =
            stacking_options(kind, cfg, seed, view.train, fabs_grid, frel_grid, pos_grid, seq_grid);
        FittedPipeline p;
        p.kind = kind;
        p.bias_type = bt;
        p.stack = train_stacking(view.train, view.validation, bt, opt);

        ReportRow row;
        row.bias_type = bt_name;
        row.feature = feature;
        row.classifier = "svm-stacking";
        row.hyper = "meta over base scores";
        auto shared = std::make_shared<FittedPipeline>(std::move(p));
        row.validation_accuracy = validation_accuracy(*shared, view.validation, bt);
        row.test = test_metrics(*shared, view.test);
        row.model = shared;
        report.rows.push_back(std::move(row));
    }
}

// Per-bias-type corpus for Q3: either the corpus itself (already overlaid
// with this type) or a fresh overlay from a predictions file covering it.
std::optional<Corpus> q3_corpus_for(BiasType bt, const Corpus& corpus, const RunConfig& cfg,
                                    std::vector<std::string>& notes);

void run_q1_block(RunReport& report, const Corpus& corpus, const Split& split,
                  const RunConfig& cfg) {
    const SplitView view = apply_split(corpus, split);

    ReportRow baseline;
    baseline.bias_type = "-";
    baseline.feature = "-";
    baseline.classifier = "all-bias-baseline";
    baseline.hyper = "-";
    {
        std::vector<int> predictions(view.test.size(), 1), gold;
        for (const Article* a : view.test) gold.push_back(a->label == Label::Bias ? 1 : 0);
        baseline.test = evaluate(predictions, gold);
        std::vector<int> vpred(view.validation.size(), 1), vgold;
        for (const Article* a : view.validation)
            vgold.push_back(a->label == Label::Bias ? 1 : 0);
        baseline.validation_accuracy = evaluate(vpred, vgold).accuracy;
    }
    report.rows.push_back(std::move(baseline));

    for (auto [kind, classifier] :
         {std::pair{PipelineKind::NgramSvm, "svm"},
          std::pair{PipelineKind::NgramLogReg, "logistic-regression"}}) {
        const std::string key = std::string("q1/") + to_string(kind);
        GridResult grid = grid_search(cfg.grid, kind, corpus, split, BiasType::Any, cfg.train,
                                      derive_seed(cfg.seed, fnv1a(key)), cfg.jobs);
        append_grid(report, key, grid);
        ReportRow row;
        row.bias_type = "-";
        row.feature = "ngrams(1-3)";
        row.classifier = classifier;
        row.hyper = grid.best.describe(kind);
        row.validation_accuracy = grid.validation_accuracy;
        row.test = test_metrics(*grid.model, view.test);
        row.model = grid.model;
        report.rows.push_back(std::move(row));
    }
}

} // namespace

RunReport run_table(ExperimentId id, const Corpus& corpus, const RunConfig& cfg) {
    RunReport report;
    report.experiment = to_string(id);
    report.seed = cfg.seed;
    report.corpus_fingerprint = corpus_fingerprint(corpus);
    for (const Article& a : corpus.articles)
        if (static_cast<int>(a.sentences.size()) > 100) ++report.articles_over_m;
    if (report.articles_over_m > 0)
        report.notes.push_back("normalization raised m to the article length for " +
                               std::to_string(report.articles_over_m) + " article(s)");

    const bool with_event = id == ExperimentId::Q1WithEvent || id == ExperimentId::Q3WithEvent;
    report.split = with_event ? split_random(corpus, cfg.seed) : split_by_event(corpus, cfg.seed);

    switch (id) {
    case ExperimentId::Q1WithEvent:
    case ExperimentId::Q1WithoutEvent:
        run_q1_block(report, corpus, report.split, cfg);
        break;
    case ExperimentId::Q2GroundTruth:
        for (BiasType bt : {BiasType::Lexical, BiasType::Informational, BiasType::Any})
            run_second_order_block(report, bt, corpus, report.split, cfg);
        break;
    case ExperimentId::Q3Predicted:
    case ExperimentId::Q3WithEvent: {
        bool any_block = false;
        for (BiasType bt : {BiasType::Lexical, BiasType::Informational, BiasType::Any}) {
            std::optional<Corpus> overlaid = q3_corpus_for(bt, corpus, cfg, report.notes);
            if (!overlaid) continue;
            any_block = true;
            run_second_order_block(report, bt, *overlaid, report.split, cfg);
        }
        if (!any_block)
            throw ValidationError(
                "no sentence-level predictions available for any bias type; overlay them first "
                "(overlay-predictions) or pass prediction files via --predictions");
        break;
    }
    }
    return report;
}

namespace {

std::optional<Corpus> q3_corpus_for(BiasType bt, const Corpus& corpus, const RunConfig& cfg,
                                    std::vector<std::string>& notes) {
    if (corpus.overlaid_with(bt)) return corpus;
    for (const std::string& path : cfg.predictions_paths) {
        std::ifstream in(path);
        if (!in) throw ValidationError("cannot open predictions file '" + path + "'");
        std::vector<PredictionRecord> records = parse_predictions(in);
        bool covers = std::any_of(records.begin(), records.end(),
                                  [bt](const PredictionRecord& r) { return r.type == bt; });
        if (covers) return overlay_predictions(corpus, records);
    }
    notes.push_back(std::string("no predictions for bias type '") + to_string(bt) +
                    "'; block skipped");
    return std::nullopt;
}

std::string format_double(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4) << v;
    return out.str();
}

} // namespace

void write_report_tsv(const RunReport& report, std::ostream& out) {
    out << "# experiment\t" << report.experiment << "\n";
    out << "# seed\t" << report.seed << "\n";
    out << "# corpus_fingerprint\t" << std::hex << report.corpus_fingerprint << std::dec << "\n";
    out << "# split_mode\t" << to_string(report.split.mode) << "\n";
    for (const std::string& note : report.notes) out << "# note\t" << note << "\n";
    out << "bias_type\tfeature\tclassifier\taccuracy\tprecision\trecall\tf1\tvalidation_accuracy"
           "\thyperparameters\n";
    for (const ReportRow& row : report.rows)
        out << row.bias_type << '\t' << row.feature << '\t' << row.classifier << '\t'
            << format_double(row.test.accuracy) << '\t' << format_double(row.test.precision)
            << '\t' << format_double(row.test.recall) << '\t' << format_double(row.test.f1)
            << '\t' << format_double(row.validation_accuracy) << '\t' << row.hyper << '\n';
}

void write_report_text(const RunReport& report, std::ostream& out) {
    out << "Experiment " << report.experiment << " (seed " << report.seed << ", split "
        << to_string(report.split.mode) << ")\n";
    for (const std::string& note : report.notes) out << "note: " << note << "\n";

    std::vector<std::array<std::string, 5>> cells;
    cells.push_back({"Bias", "Feature", "Classifier", "Accuracy", "Val.Acc"});
    for (const ReportRow& row : report.rows)
        cells.push_back({row.bias_type, row.feature, row.classifier,
                         format_double(row.test.accuracy),
                         format_double(row.validation_accuracy)});
    std::array<std::size_t, 5> width{};
    for (const auto& row : cells)
        for (std::size_t c = 0; c < 5; ++c) width[c] = std::max(width[c], row[c].size());
    for (std::size_t r = 0; r < cells.size(); ++r) {
        for (std::size_t c = 0; c < 5; ++c)
            out << std::left << std::setw(static_cast<int>(width[c]) + 2) << cells[r][c];
        out << "\n";
        if (r == 0) {
            for (std::size_t c = 0; c < 5; ++c) out << std::string(width[c] + 2, '-');
            out << "\n";
        }
    }
}

void write_grid_tsv(const RunReport& report, std::ostream& out) {
    out << "row\tmethod\tk\tL\torder\tC\tweights\tcounts\tvalidation_accuracy\n";
    for (const ReportGridEntry& e : report.grid)
        out << e.row_key << '\t' << to_string(e.point.method) << '\t' << e.point.k << '\t'
            << e.point.component_count << '\t' << e.point.order << '\t' << e.point.cost << '\t'
            << (e.point.balanced ? "balanced" : "uniform") << '\t'
            << (e.point.ngram_binary ? "binary" : "raw") << '\t'
            << format_double(e.validation_accuracy) << '\n';
}

HistogramData export_position_histogram(const PositionModel& pm, int position, int bins) {
    if (position < 0 || position >= pm.k)
        throw ValidationError("export_position_histogram: position out of range");
    if (bins < 1) throw ValidationError("export_position_histogram: bins must be >= 1");
    const PositionSlot& slot = pm.positions[position];
    const std::vector<double>& samples = slot.samples;

    HistogramData data;
    data.position = position;
    data.bin_width = 1.0 / bins;
    data.bin_centers.resize(bins);
    data.densities.assign(bins, 0.0);
    for (int b = 0; b < bins; ++b) data.bin_centers[b] = (b + 0.5) * data.bin_width;
    for (double x : samples) {
        int b = std::min(bins - 1, static_cast<int>(x * bins)); // x == 1 lands in the last bin
        data.densities[b] += 1.0;
    }
    // Normalize so the bin areas sum to one.
    const double n = static_cast<double>(samples.size());
    for (double& d : data.densities) d = n > 0 ? d / (n * data.bin_width) : 0.0;

    // Sample the component curves over a range wide enough to hold their mass.
    double lo = 0.0, hi = 1.0;
    for (const GaussComponent& c : slot.gmm.components) {
        double sigma = std::sqrt(c.variance);
        lo = std::min(lo, c.mean - 6.0 * sigma);
        hi = std::max(hi, c.mean + 6.0 * sigma);
    }
    const int curve_samples = 200;
    for (std::size_t l = 0; l < slot.gmm.components.size(); ++l) {
        const GaussComponent& c = slot.gmm.components[l];
        for (int s = 0; s < curve_samples; ++s) {
            double x = lo + (hi - lo) * s / (curve_samples - 1);
            data.curves.push_back({x, static_cast<int>(l),
                                   c.weight * normal_pdf(x, c.mean, c.variance)});
        }
    }
    return data;
}

void write_histogram_tsv(const HistogramData& data, std::ostream& out) {
    out << "bin_center\tdensity\n";
    out.precision(17);
    for (std::size_t b = 0; b < data.bin_centers.size(); ++b)
        out << data.bin_centers[b] << '\t' << data.densities[b] << '\n';
}

void write_curves_tsv(const HistogramData& data, std::ostream& out) {
    out << "x\tcomponent_id\tdensity\n";
    out.precision(17);
    for (const HistogramData::CurvePoint& p : data.curves)
        out << p.x << '\t' << p.component << '\t' << p.density << '\n';
}

} // namespace mbd
