#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mbd/config.hpp"
#include "mbd/error.hpp"
#include "mbd/experiments.hpp"
#include "mbd/serialize.hpp"
#include "synthetic.hpp"

using namespace mbd;
using namespace mbd::testing;

namespace {

void check_disjoint(const Split& split) {
    std::set<std::string> seen;
    for (const auto* set : {&split.train, &split.validation, &split.test})
        for (const std::string& id : *set) CHECK(seen.insert(id).second);
}

RunConfig tiny_config() {
    RunConfig cfg;
    cfg.seed = 11;
    cfg.jobs = 2;
    cfg.train.epochs = 40;
    cfg.grid.sampling = {Sampling::Average};
    cfg.grid.k = {3};
    cfg.grid.component_counts = {2};
    cfg.grid.orders = {1};
    cfg.grid.costs = {1.0, 10.0};
    cfg.grid.balanced = {false};
    cfg.grid.ngram_binary = {false};
    return cfg;
}

} // namespace

TEST_CASE("random split cuts 60/20/20 and is deterministic") {
    Corpus corpus = random_corpus(300, 10);
    Split a = split_random(corpus, 42);
    Split b = split_random(corpus, 42);
    CHECK(a.train == b.train);
    CHECK(a.validation == b.validation);
    CHECK(a.test == b.test);
    CHECK(a.train.size() == 180);
    CHECK(a.validation.size() == 60);
    CHECK(a.test.size() == 60);
    check_disjoint(a);

    Split c = split_random(corpus, 43);
    CHECK(a.train != c.train);

    Corpus small = random_corpus(4, 2);
    CHECK_THROWS_AS(split_random(small, 1), ValidationError);
}

TEST_CASE("event split keeps whole events together") {
    // BASIL shape: 100 events of three articles
    Corpus corpus;
    for (int e = 0; e < 100; ++e)
        for (int j = 0; j < 3; ++j)
            corpus.articles.push_back(make_article("a" + std::to_string(e * 3 + j),
                                                   "event" + std::to_string(e),
                                                   j == 0 ? RawLabel::Center : RawLabel::Right,
                                                   {1, 0, 1}));
    Split split = split_by_event(corpus, 7);
    CHECK(split.train.size() == 180);
    CHECK(split.validation.size() == 60);
    CHECK(split.test.size() == 60);
    check_disjoint(split);

    auto events_of = [&](const std::vector<std::string>& ids) {
        std::set<std::string> events;
        for (const std::string& id : ids) events.insert(corpus.find(id)->event_id);
        return events;
    };
    std::set<std::string> train_events = events_of(split.train);
    for (const std::string& e : events_of(split.validation)) CHECK(train_events.count(e) == 0);
    for (const std::string& e : events_of(split.test)) CHECK(train_events.count(e) == 0);

    Split again = split_by_event(corpus, 7);
    CHECK(split.train == again.train);
}

TEST_CASE("an event larger than the training target is rejected") {
    Corpus corpus;
    for (int i = 0; i < 20; ++i)
        corpus.articles.push_back(
            make_article("a" + std::to_string(i), "one-big-event", RawLabel::Right, {1}));
    CHECK_THROWS_AS(split_by_event(corpus, 1), ValidationError);
}

TEST_CASE("split files round-trip byte-identically") {
    Corpus corpus = random_corpus(60, 3);
    Split split = split_by_event(corpus, 9);
    std::ostringstream first, second;
    write_split(split, first);
    write_split(split, second);
    CHECK(first.str() == second.str());
    std::istringstream in(first.str());
    Split loaded = read_split(in);
    CHECK(loaded.train == split.train);
    CHECK(loaded.mode == split.mode);
    CHECK(loaded.seed == split.seed);
}

TEST_CASE("apply_split keeps corpus order and rejects unknown ids") {
    Corpus corpus = random_corpus(30, 4);
    Split split = split_random(corpus, 5);
    SplitView view = apply_split(corpus, split);
    CHECK(view.train.size() == split.train.size());
    CHECK(view.validation.size() == split.validation.size());
    CHECK(view.test.size() == split.test.size());

    split.test.push_back("not-an-article");
    CHECK_THROWS_AS(apply_split(corpus, split), ValidationError);
}

TEST_CASE("metric conventions") {
    CHECK(evaluate({1, 0, 1}, {1, 0, 1}).accuracy == 1.0);
    CHECK(evaluate({1, 0, 1}, {1, 0, 1}).f1 == 1.0);

    Metrics all_bias = evaluate(std::vector<int>(60, 1), [] {
        std::vector<int> gold(60, 0);
        std::fill(gold.begin(), gold.begin() + 31, 1);
        return gold;
    }());
    CHECK(all_bias.accuracy == doctest::Approx(31.0 / 60.0));
    CHECK(all_bias.precision == doctest::Approx(31.0 / 60.0));
    CHECK(all_bias.recall == 1.0);

    Metrics all_neutral = evaluate({0, 0, 0}, {1, 0, 1});
    CHECK(all_neutral.precision == 0.0);
    CHECK(all_neutral.recall == 0.0);
    CHECK(all_neutral.f1 == 0.0);

    CHECK_THROWS_AS(evaluate({1}, {1, 0}), ValidationError);
    CHECK_THROWS_AS(evaluate({}, {}), ValidationError);
}

TEST_CASE("grid search returns the sorted table and a deterministic winner") {
    Corpus corpus = frequency_corpus(150, 600);
    Split split = split_random(corpus, 1);
    RunConfig cfg = tiny_config();

    GridResult a = grid_search(cfg.grid, PipelineKind::FrelSvm, corpus, split, BiasType::Any,
                               cfg.train, 50, 1);
    GridResult b = grid_search(cfg.grid, PipelineKind::FrelSvm, corpus, split, BiasType::Any,
                               cfg.train, 50, 3);
    CHECK(a.best.cost == b.best.cost);
    CHECK(a.validation_accuracy == b.validation_accuracy);
    REQUIRE(a.table.size() == 2);
    for (const GridEntry& e : a.table) CHECK(e.validation_accuracy <= a.validation_accuracy);

    // singleton grid returns that point
    GridSpec singleton = cfg.grid;
    singleton.costs = {0.5};
    GridResult c = grid_search(singleton, PipelineKind::FrelSvm, corpus, split, BiasType::Any,
                               cfg.train, 50, 1);
    CHECK(c.best.cost == 0.5);
    CHECK(c.table.size() == 1);

    GridSpec empty = cfg.grid;
    empty.costs = {};
    CHECK_THROWS_AS(grid_search(empty, PipelineKind::FrelSvm, corpus, split, BiasType::Any,
                                cfg.train, 50, 1),
                    ValidationError);
}

TEST_CASE("grid search finds the frequency signal") {
    Corpus corpus = frequency_corpus(300, 1234);
    Split split = split_by_event(corpus, 3);
    RunConfig cfg = tiny_config();
    cfg.grid.costs = {1.0, 10.0, 100.0};
    GridResult result = grid_search(cfg.grid, PipelineKind::FrelSvm, corpus, split,
                                    BiasType::Any, cfg.train, 21, 2);
    CHECK(result.validation_accuracy >= 0.95);
}

TEST_CASE("sequence pipelines skip structurally invalid grid points") {
    Corpus corpus = frequency_corpus(80, 88);
    Split split = split_random(corpus, 2);
    RunConfig cfg = tiny_config();
    cfg.grid.k = {2, 3};
    cfg.grid.orders = {1, 2};
    cfg.grid.costs = {1.0};
    GridResult result = grid_search(cfg.grid, PipelineKind::SequenceSvm, corpus, split,
                                    BiasType::Any, cfg.train, 4, 2);
    for (const GridEntry& e : result.table) CHECK(e.point.order < e.point.k);
    CHECK(result.table.size() == 3); // (k=2,o=1), (k=3,o=1), (k=3,o=2)
}

TEST_CASE("q2 report covers every row of the table") {
    Corpus corpus = frequency_corpus(120, 777);
    RunConfig cfg = tiny_config();
    cfg.train.epochs = 30;
    RunReport report = run_table(ExperimentId::Q2GroundTruth, corpus, cfg);
    // 3 bias types x (6 single rows + 4 stacking rows)
    CHECK(report.rows.size() == 30);
    std::set<std::string> classifiers, features;
    for (const ReportRow& row : report.rows) {
        classifiers.insert(row.classifier);
        features.insert(row.feature);
        CHECK(row.test.accuracy >= 0.0);
        CHECK(row.test.accuracy <= 1.0);
    }
    CHECK(classifiers == std::set<std::string>{"svm", "naive-bayes", "markov", "svm-stacking"});
    CHECK(features.count("f_abs") == 1);
    CHECK(features.count("F+P+S") == 1);
    CHECK_FALSE(report.grid.empty());

    // frequency signal is strong on this corpus
    for (const ReportRow& row : report.rows)
        if (row.feature == "f_rel" && row.bias_type == "any")
            CHECK(row.test.accuracy >= 0.9);
}

TEST_CASE("q1 report has the baseline and both ngram rows") {
    Corpus corpus = frequency_corpus(100, 3141);
    RunConfig cfg = tiny_config();
    cfg.train.epochs = 10;
    RunReport report = run_table(ExperimentId::Q1WithoutEvent, corpus, cfg);
    REQUIRE(report.rows.size() == 3);
    CHECK(report.rows[0].classifier == "all-bias-baseline");
    CHECK(report.rows[1].classifier == "svm");
    CHECK(report.rows[2].classifier == "logistic-regression");
    CHECK(report.split.mode == SplitMode::WithoutEvent);

    RunReport with_event = run_table(ExperimentId::Q1WithEvent, corpus, cfg);
    CHECK(with_event.split.mode == SplitMode::WithEvent);
}

TEST_CASE("q3 requires predictions and then runs the covered blocks") {
    Corpus corpus = frequency_corpus(100, 999);
    RunConfig cfg = tiny_config();
    cfg.train.epochs = 20;
    CHECK_THROWS_WITH_AS(run_table(ExperimentId::Q3Predicted, corpus, cfg),
                         doctest::Contains("overlay"), ValidationError);

    // noisy copies of the ground truth as "predictions" for the any channel
    std::vector<PredictionRecord> records;
    Rng rng(6);
    for (const Article& a : corpus.articles)
        for (const Sentence& s : a.sentences) {
            bool truth = s.has_bias(BiasType::Any);
            bool flip = rng.next_unit() < 0.1;
            records.push_back({a.id, s.index, BiasType::Any, flip ? !truth : truth, {}});
        }
    Corpus overlaid = overlay_predictions(corpus, records);
    RunReport report = run_table(ExperimentId::Q3Predicted, overlaid, cfg);
    CHECK(report.rows.size() == 10); // only the any block has predictions
    for (const ReportRow& row : report.rows) CHECK(row.bias_type == "any");
    CHECK_FALSE(report.notes.empty()); // skipped blocks are recorded
}

TEST_CASE("reports serialize deterministically") {
    Corpus corpus = frequency_corpus(80, 2718);
    RunConfig cfg = tiny_config();
    cfg.train.epochs = 10;
    RunReport r1 = run_table(ExperimentId::Q1WithoutEvent, corpus, cfg);
    RunReport r2 = run_table(ExperimentId::Q1WithoutEvent, corpus, cfg);
    std::ostringstream a, b, ga, gb;
    write_report_tsv(r1, a);
    write_report_tsv(r2, b);
    CHECK(a.str() == b.str());
    write_grid_tsv(r1, ga);
    write_grid_tsv(r2, gb);
    CHECK(ga.str() == gb.str());
    std::ostringstream text;
    write_report_text(r1, text);
    CHECK(text.str().find("q1-wo-event") != std::string::npos);
}

TEST_CASE("model bundles round-trip through their serialization") {
    Corpus corpus = frequency_corpus(90, 41);
    Split split = split_random(corpus, 2);
    RunConfig cfg = tiny_config();
    GridResult result = grid_search(cfg.grid, PipelineKind::PositionNb, corpus, split,
                                    BiasType::Any, cfg.train, 31, 1);

    ModelBundle bundle{*result.model, corpus_fingerprint(corpus), 31};
    std::ostringstream out;
    save_bundle(bundle, out);
    std::istringstream in(out.str());
    ModelBundle loaded = load_bundle(in);
    CHECK(loaded.corpus_fingerprint == bundle.corpus_fingerprint);
    CHECK(loaded.pipeline.kind == PipelineKind::PositionNb);

    SplitView view = apply_split(corpus, split);
    for (const Article* a : view.test)
        CHECK(loaded.pipeline.predict_article(*a) == result.model->predict_article(*a));

    std::ostringstream again;
    save_bundle(loaded, again);
    CHECK(again.str() == out.str());
}

TEST_CASE("sentence-level pipeline produces total prediction coverage") {
    Corpus corpus = random_corpus(30, 55);
    Split split = split_random(corpus, 3);
    GridPoint point;
    point.cost = 1.0;
    PipelineTrainOptions options;
    options.epochs = 10;
    options.ngram_min_count = 1;
    SplitView view = apply_split(corpus, split);
    FittedPipeline pipeline = train_pipeline(PipelineKind::SentenceNgramSvm, BiasType::Lexical,
                                             view.train, point, options, 5);
    std::vector<PredictionRecord> records = predict_sentence_records(pipeline, corpus);
    std::size_t sentences = 0;
    for (const Article& a : corpus.articles) sentences += a.sentences.size();
    CHECK(records.size() == sentences);
    CoverageReport coverage;
    Corpus overlaid = overlay_predictions(corpus, records, &coverage);
    CHECK(coverage.lexical_coverage() == 1.0);
    CHECK(overlaid.overlaid_with(BiasType::Lexical));
}

TEST_CASE("position histogram normalizes to unit area") {
    Corpus corpus = frequency_corpus(200, 17);
    PositionModel pm = train_position_model(all_articles(corpus), BiasType::Any, 4, 3,
                                            Sampling::Average, 23);
    HistogramData data = export_position_histogram(pm, 1, 10);
    REQUIRE(data.bin_centers.size() == 10);
    double area = 0.0;
    for (double d : data.densities) area += d * data.bin_width;
    CHECK(area == doctest::Approx(1.0).epsilon(1e-6));

    // trapezoid integral over all component curves is about one
    double integral = 0.0;
    const int per_component = 200;
    for (std::size_t l = 0; l * per_component < data.curves.size(); ++l) {
        for (int s = 0; s + 1 < per_component; ++s) {
            const auto& p0 = data.curves[l * per_component + s];
            const auto& p1 = data.curves[l * per_component + s + 1];
            integral += 0.5 * (p0.density + p1.density) * (p1.x - p0.x);
        }
    }
    CHECK(integral == doctest::Approx(1.0).epsilon(0.01));

    CHECK_THROWS_AS(export_position_histogram(pm, 9, 10), ValidationError);
    CHECK_THROWS_AS(export_position_histogram(pm, 0, 0), ValidationError);
}

TEST_CASE("uniform samples give flat unit density") {
    PositionModel pm;
    pm.k = 1;
    pm.component_count = 1;
    pm.positions.resize(1);
    Rng rng(9);
    for (int i = 0; i < 20000; ++i) pm.positions[0].samples.push_back(rng.next_unit());
    pm.positions[0].gmm.components = {{0.5, 1.0 / 12.0, 1.0}};
    HistogramData data = export_position_histogram(pm, 0, 10);
    for (double d : data.densities) CHECK(d == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("config files parse and reject unknown keys") {
    std::istringstream in(R"(
# run settings
seed = 99
jobs = 4
grid.k = 2, 4
grid.sampling = average, last
grid.cost = 0.5
ngram.min_count = 1
predictions = a.jsonl, b.jsonl
)");
    RunConfig cfg = parse_config(in);
    CHECK(cfg.seed == 99);
    CHECK(cfg.jobs == 4);
    CHECK(cfg.grid.k == std::vector<int>{2, 4});
    CHECK(cfg.grid.sampling == std::vector<Sampling>{Sampling::Average, Sampling::Last});
    CHECK(cfg.grid.costs == std::vector<double>{0.5});
    CHECK(cfg.train.ngram_min_count == 1);
    CHECK(cfg.predictions_paths == std::vector<std::string>{"a.jsonl", "b.jsonl"});

    std::istringstream bad("nonsense = 1\n");
    CHECK_THROWS_AS(parse_config(bad), ParseError);
    std::istringstream malformed("seed 99\n");
    CHECK_THROWS_AS(parse_config(malformed), ParseError);
}
