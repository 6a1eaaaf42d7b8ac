#ifndef MBD_EXPERIMENTS_HPP
#define MBD_EXPERIMENTS_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mbd/biasmodels.hpp"
#include "mbd/corpus.hpp"
#include "mbd/ngram.hpp"

namespace mbd {

enum class SplitMode { WithEvent, WithoutEvent };
const char* to_string(SplitMode m);
SplitMode split_mode_from_string(const std::string& s);

struct Split {
    std::vector<std::string> train, validation, test; // sorted article ids
    SplitMode mode = SplitMode::WithEvent;
    std::uint64_t seed = 0;
};

// Seeded shuffle then 60/20/20 cut; event overlap permitted.
Split split_random(const Corpus& corpus, std::uint64_t seed);

// Whole events assigned to one set each, targeting 60/20/20 of the articles.
Split split_by_event(const Corpus& corpus, std::uint64_t seed);

void write_split(const Split& split, std::ostream& out);
Split read_split(std::istream& in);

struct SplitView {
    std::vector<const Article*> train, validation, test;
};
SplitView apply_split(const Corpus& corpus, const Split& split);

// Binary metrics with bias as the positive class; precision/recall are 0 when
// their denominator is 0 (and then f1 is 0 as well).
struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};
Metrics evaluate(const std::vector<int>& predictions, const std::vector<int>& gold);

enum class PipelineKind {
    Majority,
    NgramSvm,
    NgramLogReg,
    SentenceNgramSvm,
    SentenceNgramLogReg,
    FabsSvm,
    FrelSvm,
    PositionNb,
    PositionSvm,
    SequenceMarkov,
    SequenceSvm,
    StackFP,
    StackFS,
    StackPS,
    StackFPS,
};
const char* to_string(PipelineKind k);
PipelineKind pipeline_from_string(const std::string& s);
bool is_stacking(PipelineKind k);
bool is_sentence_level(PipelineKind k);

struct GridPoint {
    Sampling method = Sampling::Average;
    int k = 0;
    int component_count = 0;
    int order = 0;
    double cost = 1.0;
    bool balanced = false;
    bool ngram_binary = false;

    std::string describe(PipelineKind kind) const;
};

struct GridSpec {
    std::vector<Sampling> sampling = {Sampling::Average, Sampling::Maximum, Sampling::Last};
    std::vector<int> k = {3, 8, 10};
    std::vector<int> component_counts = {3, 5};
    std::vector<int> orders = {1, 2};
    std::vector<double> costs = {0.01, 0.1, 1.0, 10.0, 100.0};
    std::vector<bool> balanced = {false, true};
    std::vector<bool> ngram_binary = {false, true};
};

struct PipelineTrainOptions {
    int epochs = 200;
    int ngram_n_max = 3;
    int ngram_min_count = 2;
};

// A fitted classifier plus everything needed to score new inputs.
struct FittedPipeline {
    PipelineKind kind = PipelineKind::Majority;
    BiasType bias_type = BiasType::Any;
    GridPoint hyper;
    std::optional<PositionModel> pm;
    std::optional<TransitionModel> tm;
    std::optional<NgramVocab> vocab;
    std::optional<LinearModel> linear;
    std::optional<StackingModel> stack;

    int predict_article(const Article& article) const; // 1 = bias
    double score_article(const Article& article) const;
    int predict_text(const std::string& text) const; // sentence-level kinds
    double score_text(const std::string& text) const;
};

FittedPipeline train_pipeline(PipelineKind kind, BiasType bt,
                              const std::vector<const Article*>& train, const GridPoint& point,
                              const PipelineTrainOptions& options, std::uint64_t seed);

// Sentence predictions over the whole corpus from a sentence-level pipeline,
// ready to feed overlay_predictions.
std::vector<PredictionRecord> predict_sentence_records(const FittedPipeline& pipeline,
                                                       const Corpus& corpus);

struct GridEntry {
    GridPoint point;
    double validation_accuracy = 0.0;
};

struct GridResult {
    GridPoint best;
    double validation_accuracy = 0.0;
    std::vector<GridEntry> table; // canonical tie-break order
    std::shared_ptr<const FittedPipeline> model;
};

// Exhaustive validation-accuracy search over the applicable axes; ties break
// to the smaller (k, L, order, C) point.
GridResult grid_search(const GridSpec& spec, PipelineKind kind, const Corpus& corpus,
                       const Split& split, BiasType bt, const PipelineTrainOptions& options,
                       std::uint64_t seed, int jobs = 1);

enum class ExperimentId { Q1WithEvent, Q1WithoutEvent, Q2GroundTruth, Q3Predicted, Q3WithEvent };
const char* to_string(ExperimentId id);
ExperimentId experiment_from_string(const std::string& s);

struct RunConfig; // mbd/config.hpp

struct ReportRow {
    std::string bias_type; // "-" for Q1 rows
    std::string feature;
    std::string classifier;
    std::string hyper;
    double validation_accuracy = 0.0;
    Metrics test;
    std::shared_ptr<const FittedPipeline> model; // null for the baseline
};

struct ReportGridEntry {
    std::string row_key;
    GridPoint point;
    double validation_accuracy = 0.0;
};

struct RunReport {
    std::string experiment;
    std::uint64_t seed = 0;
    std::uint64_t corpus_fingerprint = 0;
    std::size_t articles_over_m = 0; // articles whose length forced m above the default
    Split split;
    std::vector<ReportRow> rows;
    std::vector<ReportGridEntry> grid;
    std::vector<std::string> notes;
};

RunReport run_table(ExperimentId id, const Corpus& corpus, const RunConfig& config);

void write_report_tsv(const RunReport& report, std::ostream& out);
void write_report_text(const RunReport& report, std::ostream& out);
void write_grid_tsv(const RunReport& report, std::ostream& out);

// Density-normalized histogram of a position's training samples plus the
// fitted per-component curves (weight * pdf at 200 abscissae).
struct HistogramData {
    int position = 0;
    double bin_width = 0.0;
    std::vector<double> bin_centers;
    std::vector<double> densities;
    struct CurvePoint {
        double x = 0.0;
        int component = 0;
        double density = 0.0;
    };
    std::vector<CurvePoint> curves;
};

HistogramData export_position_histogram(const PositionModel& pm, int position, int bins);
void write_histogram_tsv(const HistogramData& data, std::ostream& out);
void write_curves_tsv(const HistogramData& data, std::ostream& out);

} // namespace mbd

#endif
