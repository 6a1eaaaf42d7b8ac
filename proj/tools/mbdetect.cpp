#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mbd/config.hpp"
#include "mbd/corpus.hpp"
#include "mbd/error.hpp"
#include "mbd/experiments.hpp"
#include "mbd/rng.hpp"
#include "mbd/serialize.hpp"

namespace fs = std::filesystem;

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw mbd::ValidationError("cannot open '" + path + "'");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw mbd::ValidationError("cannot write '" + path + "'");
    return out;
}

mbd::Corpus load_corpus(const std::string& path) {
    std::ifstream in = open_input(path);
    return mbd::parse_corpus(in);
}

mbd::Split make_or_load_split(const mbd::Corpus& corpus, const mbd::RunConfig& cfg) {
    if (!cfg.split_path.empty()) {
        std::ifstream in = open_input(cfg.split_path);
        return mbd::read_split(in);
    }
    const std::string mode = cfg.mode.empty() ? "without-event" : cfg.mode;
    return mbd::split_mode_from_string(mode) == mbd::SplitMode::WithEvent
               ? mbd::split_random(corpus, cfg.seed)
               : mbd::split_by_event(corpus, cfg.seed);
}

void write_row_bundle(const mbd::ReportRow& row, const mbd::RunReport& report,
                      const fs::path& dir) {
    if (!row.model) return;
    std::string name = row.bias_type + "_" + row.feature + "_" + row.classifier;
    for (char& c : name)
        if (c == '/' || c == ' ' || c == '+') c = '-';
    fs::path path = dir / (name + ".json");
    mbd::ModelBundle bundle{*row.model, report.corpus_fingerprint, report.seed};
    std::ofstream out = open_output(path.string());
    mbd::save_bundle(bundle, out);
}

int cmd_ingest(const mbd::RunConfig& cfg) {
    mbd::Corpus corpus = load_corpus(cfg.corpus_path);
    std::size_t sentences = 0;
    std::size_t biased[3] = {0, 0, 0};
    std::size_t bias_articles = 0;
    for (const mbd::Article& a : corpus.articles) {
        if (a.label == mbd::Label::Bias) ++bias_articles;
        sentences += a.sentences.size();
        for (const mbd::Sentence& s : a.sentences) {
            if (s.lexical_bias) ++biased[0];
            if (s.informational_bias) ++biased[1];
            if (s.lexical_bias || s.informational_bias) ++biased[2];
        }
    }
    std::cout << "articles\t" << corpus.articles.size() << "\n"
              << "events\t" << corpus.events().size() << "\n"
              << "bias_articles\t" << bias_articles << "\n"
              << "neutral_articles\t" << corpus.articles.size() - bias_articles << "\n"
              << "sentences\t" << sentences << "\n"
              << "lexical_bias_sentences\t" << biased[0] << "\n"
              << "informational_bias_sentences\t" << biased[1] << "\n"
              << "any_bias_sentences\t" << biased[2] << "\n"
              << "fingerprint\t" << std::hex << mbd::corpus_fingerprint(corpus) << std::dec
              << "\n";
    if (!cfg.out_dir.empty()) {
        std::ofstream out = open_output(cfg.out_dir);
        mbd::write_corpus(corpus, out);
    }
    return 0;
}

int cmd_split(const mbd::RunConfig& cfg) {
    mbd::Corpus corpus = load_corpus(cfg.corpus_path);
    const std::string mode = cfg.mode.empty() ? "without-event" : cfg.mode;
    mbd::Split split = mbd::split_mode_from_string(mode) == mbd::SplitMode::WithEvent
                           ? mbd::split_random(corpus, cfg.seed)
                           : mbd::split_by_event(corpus, cfg.seed);
    if (cfg.out_dir.empty()) {
        mbd::write_split(split, std::cout);
    } else {
        std::ofstream out = open_output(cfg.out_dir);
        mbd::write_split(split, out);
    }
    return 0;
}

int cmd_train(const mbd::RunConfig& cfg, const std::string& pipeline_name,
              const std::string& predictions_out) {
    mbd::Corpus corpus = load_corpus(cfg.corpus_path);
    mbd::PipelineKind kind = mbd::pipeline_from_string(pipeline_name);
    if (mbd::is_stacking(kind) || kind == mbd::PipelineKind::Majority)
        throw mbd::ValidationError(
            "train supports grid-searchable pipelines; stacking rows come from 'reproduce'");
    mbd::BiasType bt =
        mbd::bias_type_from_string(cfg.bias_type.empty() ? "any" : cfg.bias_type);
    mbd::Split split = make_or_load_split(corpus, cfg);

    mbd::GridResult result = mbd::grid_search(cfg.grid, kind, corpus, split, bt, cfg.train,
                                              cfg.seed, cfg.jobs);
    std::cerr << "best " << result.best.describe(kind) << " validation accuracy "
              << result.validation_accuracy << "\n";

    if (!cfg.out_dir.empty()) {
        mbd::ModelBundle bundle{*result.model, mbd::corpus_fingerprint(corpus), cfg.seed};
        std::ofstream out = open_output(cfg.out_dir);
        mbd::save_bundle(bundle, out);
    }
    if (!predictions_out.empty()) {
        if (!mbd::is_sentence_level(kind))
            throw mbd::ValidationError("--predictions-out requires a sentence-level pipeline");
        std::vector<mbd::PredictionRecord> records =
            mbd::predict_sentence_records(*result.model, corpus);
        std::ofstream out = open_output(predictions_out);
        mbd::write_predictions(records, out);
    }
    return 0;
}

int cmd_eval(const mbd::RunConfig& cfg, const std::string& model_path, const std::string& on) {
    std::ifstream min = open_input(model_path);
    mbd::ModelBundle bundle = mbd::load_bundle(min);
    mbd::Corpus corpus = load_corpus(cfg.corpus_path);
    if (mbd::corpus_fingerprint(corpus) != bundle.corpus_fingerprint)
        throw mbd::ValidationError(
            "corpus fingerprint does not match the one stored in the model bundle");
    mbd::Split split = make_or_load_split(corpus, cfg);
    mbd::SplitView view = mbd::apply_split(corpus, split);
    const std::vector<const mbd::Article*>& articles =
        on == "train" ? view.train : on == "validation" ? view.validation : view.test;

    std::vector<int> predictions, gold;
    if (mbd::is_sentence_level(bundle.pipeline.kind)) {
        for (const mbd::Article* a : articles)
            for (const mbd::Sentence& s : a->sentences) {
                predictions.push_back(bundle.pipeline.predict_text(s.text));
                gold.push_back(s.has_bias(bundle.pipeline.bias_type) ? 1 : 0);
            }
    } else {
        for (const mbd::Article* a : articles) {
            predictions.push_back(bundle.pipeline.predict_article(*a));
            gold.push_back(a->label == mbd::Label::Bias ? 1 : 0);
        }
    }
    mbd::Metrics m = mbd::evaluate(predictions, gold);
    std::cout << "subset\t" << on << "\n"
              << "examples\t" << predictions.size() << "\n"
              << "accuracy\t" << m.accuracy << "\n"
              << "precision\t" << m.precision << "\n"
              << "recall\t" << m.recall << "\n"
              << "f1\t" << m.f1 << "\n";
    return 0;
}

int cmd_reproduce(const mbd::RunConfig& cfg) {
    mbd::Corpus corpus = load_corpus(cfg.corpus_path);
    mbd::ExperimentId id = mbd::experiment_from_string(cfg.experiment);
    mbd::RunReport report = mbd::run_table(id, corpus, cfg);

    if (cfg.out_dir.empty()) {
        mbd::write_report_text(report, std::cout);
        return 0;
    }
    fs::path dir(cfg.out_dir);
    fs::create_directories(dir / "models");
    {
        std::ofstream out = open_output((dir / (report.experiment + ".tsv")).string());
        mbd::write_report_tsv(report, out);
    }
    {
        std::ofstream out = open_output((dir / (report.experiment + ".txt")).string());
        mbd::write_report_text(report, out);
    }
    {
        std::ofstream out = open_output((dir / (report.experiment + "-grid.tsv")).string());
        mbd::write_grid_tsv(report, out);
    }
    {
        std::ofstream out = open_output((dir / "split.json").string());
        mbd::write_split(report.split, out);
    }
    for (const mbd::ReportRow& row : report.rows) write_row_bundle(row, report, dir / "models");
    std::cerr << "report written to " << dir.string() << "\n";
    return 0;
}

int cmd_plot_data(const mbd::RunConfig& cfg, int k, int mixtures, const std::string& method,
                  int position, int bins) {
    mbd::Corpus corpus = load_corpus(cfg.corpus_path);
    mbd::BiasType bt =
        mbd::bias_type_from_string(cfg.bias_type.empty() ? "any" : cfg.bias_type);
    mbd::Split split = make_or_load_split(corpus, cfg);
    mbd::SplitView view = mbd::apply_split(corpus, split);
    mbd::PositionModel pm = mbd::train_position_model(
        view.train, bt, k, mixtures, mbd::sampling_from_string(method), cfg.seed);
    mbd::HistogramData data = mbd::export_position_histogram(pm, position, bins);

    fs::path dir(cfg.out_dir.empty() ? "." : cfg.out_dir);
    fs::create_directories(dir);
    {
        std::ofstream out = open_output((dir / "histogram.tsv").string());
        mbd::write_histogram_tsv(data, out);
    }
    {
        std::ofstream out = open_output((dir / "curves.tsv").string());
        mbd::write_curves_tsv(data, out);
    }
    return 0;
}

int cmd_overlay(const mbd::RunConfig& cfg) {
    mbd::Corpus corpus = load_corpus(cfg.corpus_path);
    std::vector<mbd::PredictionRecord> records;
    for (const std::string& path : cfg.predictions_paths) {
        std::ifstream in = open_input(path);
        std::vector<mbd::PredictionRecord> part = mbd::parse_predictions(in);
        records.insert(records.end(), part.begin(), part.end());
    }
    mbd::CoverageReport coverage;
    mbd::Corpus overlaid = mbd::overlay_predictions(corpus, records, &coverage);
    std::cerr << "coverage: lexical " << coverage.lexical_coverage() << ", informational "
              << coverage.informational_coverage() << ", overall " << coverage.coverage()
              << " of " << coverage.total_sentences << " sentences\n";
    if (cfg.out_dir.empty()) {
        mbd::write_corpus(overlaid, std::cout);
    } else {
        std::ofstream out = open_output(cfg.out_dir);
        mbd::write_corpus(overlaid, out);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mbdetect - article-level media bias detection from sentence-level bias"};
    app.require_subcommand(1);

    mbd::RunConfig cfg;
    std::string config_path;
    std::string pipeline_name, predictions_out, model_path, eval_on = "test";
    int k = 10, mixtures = 5, position = 0, bins = 20;
    std::string method = "average";

    auto add_common = [&](CLI::App* cmd, bool needs_corpus) {
        cmd->add_option("--config", config_path, "key = value configuration file");
        auto* c = cmd->add_option("--corpus", cfg.corpus_path, "corpus file (JSON lines)");
        if (needs_corpus) c->required();
        cmd->add_option("--seed", cfg.seed, "seed controlling all randomness");
        cmd->add_option("--jobs", cfg.jobs, "parallel workers for grid evaluation");
        cmd->add_option("--out", cfg.out_dir, "output file or directory");
        cmd->add_option("--split-file", cfg.split_path, "split file produced by 'split'");
        cmd->add_option("--mode", cfg.mode, "with-event or without-event")
            ->check(CLI::IsMember({"with-event", "without-event"}));
        cmd->add_option("--bias-type", cfg.bias_type, "lexical, informational or any")
            ->check(CLI::IsMember({"lexical", "informational", "any"}));
        cmd->add_option("--predictions", cfg.predictions_paths,
                        "sentence prediction file(s), repeatable");
    };

    CLI::App* ingest = app.add_subcommand("ingest", "validate a corpus and print a summary");
    add_common(ingest, true);

    CLI::App* split = app.add_subcommand("split", "write a deterministic train/val/test split");
    add_common(split, true);

    CLI::App* train = app.add_subcommand("train", "grid-search and train one pipeline");
    add_common(train, true);
    train->add_option("--pipeline", pipeline_name, "pipeline id, e.g. fabs-svm, position-nb")
        ->required();
    train->add_option("--predictions-out", predictions_out,
                      "write sentence predictions of a sentence-level pipeline");

    CLI::App* eval = app.add_subcommand("eval", "evaluate a saved model bundle");
    add_common(eval, true);
    eval->add_option("--model", model_path, "model bundle file")->required();
    eval->add_option("--on", eval_on, "train, validation or test")
        ->check(CLI::IsMember({"train", "validation", "test"}));

    CLI::App* reproduce = app.add_subcommand("reproduce", "run a full experiment table");
    add_common(reproduce, true);
    reproduce->add_option("--experiment", cfg.experiment,
                          "q1-w-event, q1-wo-event, q2-gt, q3-pr or q3-w-event")
        ->required();

    CLI::App* plot = app.add_subcommand("plot-data", "export position histogram + mixture curves");
    add_common(plot, true);
    plot->add_option("--k", k, "number of normalized positions");
    plot->add_option("--mixtures", mixtures, "Gaussian components per position");
    plot->add_option("--method", method, "sampling method")
        ->check(CLI::IsMember({"average", "maximum", "last"}));
    plot->add_option("--position", position, "0-based position to export");
    plot->add_option("--bins", bins, "histogram bin count");

    CLI::App* overlay =
        app.add_subcommand("overlay-predictions", "replace sentence flags by predictions");
    add_common(overlay, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 1;
    }

    try {
        // Flags override the config file, so re-parse flags on top of it.
        if (!config_path.empty()) {
            std::ifstream in = open_input(config_path);
            mbd::RunConfig from_file = mbd::parse_config(in);
            mbd::RunConfig flag_values = cfg;
            CLI::App* active = app.get_subcommands().front();
            auto keep = [&](const std::string& flag) {
                const CLI::Option* opt = active->get_option_no_throw(flag);
                return opt != nullptr && opt->count() > 0;
            };
            cfg = from_file;
            if (keep("--corpus")) cfg.corpus_path = flag_values.corpus_path;
            if (keep("--seed")) cfg.seed = flag_values.seed;
            if (keep("--jobs")) cfg.jobs = flag_values.jobs;
            if (keep("--out")) cfg.out_dir = flag_values.out_dir;
            if (keep("--split-file")) cfg.split_path = flag_values.split_path;
            if (keep("--mode")) cfg.mode = flag_values.mode;
            if (keep("--bias-type")) cfg.bias_type = flag_values.bias_type;
            if (keep("--predictions")) cfg.predictions_paths = flag_values.predictions_paths;
            if (keep("--experiment")) cfg.experiment = flag_values.experiment;
        }

        if (ingest->parsed()) return cmd_ingest(cfg);
        if (split->parsed()) return cmd_split(cfg);
        if (train->parsed()) return cmd_train(cfg, pipeline_name, predictions_out);
        if (eval->parsed()) return cmd_eval(cfg, model_path, eval_on);
        if (reproduce->parsed()) return cmd_reproduce(cfg);
        if (plot->parsed()) return cmd_plot_data(cfg, k, mixtures, method, position, bins);
        if (overlay->parsed()) return cmd_overlay(cfg);
        std::cerr << app.help();
        return 1;
    } catch (const mbd::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const mbd::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
