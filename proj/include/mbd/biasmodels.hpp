#ifndef MBD_BIASMODELS_HPP
#define MBD_BIASMODELS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "mbd/corpus.hpp"
#include "mbd/gmm.hpp"
#include "mbd/linear.hpp"
#include "mbd/resample.hpp"

namespace mbd {

struct FrequencyFeatures {
    int f_abs = 0;      // number of biased sentences
    double f_rel = 0.0; // f_abs / n
};

FrequencyFeatures frequency_features(const std::vector<int>& seq);

// One fitted mixture and its label table per normalized position. The
// training samples are kept for plot-data export.
struct PositionSlot {
    Gmm gmm;
    ComponentBiasTable table;
    std::vector<double> samples;
};

struct PositionModel {
    int k = 0;
    int component_count = 0;
    Sampling method = Sampling::Average;
    int m = 100;
    BiasType bias_type = BiasType::Any;
    double bias_prior = 0.5; // p(a=1) from the training split, unsmoothed
    std::vector<PositionSlot> positions;

    NormalizedSequence normalized(const std::vector<int>& seq) const {
        return normalize(seq, k, method, m);
    }
};

PositionModel train_position_model(const std::vector<const Article*>& train, BiasType bt, int k,
                                   int component_count, Sampling method, std::uint64_t seed);

// Log of p(a) * prod_i p(a|N(b_i)) / p(a), the position Naive Bayes score.
double nb_log_score(const PositionModel& pm, const std::vector<int>& seq, int label);
Label nb_classify(const PositionModel& pm, const std::vector<int>& seq);

// Entry i = p(a=1 | component assigned at position i); SVM features.
std::vector<double> position_feature_vector(const PositionModel& pm, const std::vector<int>& seq);

// Smoothed p(a=1 | predecessor components, current component) per position.
// Contexts are flattened predecessor-major: ((c_{i-order} * L + ...) * L + c_i.
struct TransitionModel {
    int order = 1;
    int k = 0;
    int component_count = 0;
    std::vector<std::vector<double>> bias_posterior; // [position - order][context]

    std::size_t context_count() const;
    double entry(int position, const std::vector<int>& assignments) const;
};

TransitionModel train_transition_model(const std::vector<const Article*>& train, BiasType bt,
                                       const PositionModel& pm, int order, std::uint64_t seed);

// Markov-chain score: the first `order` positions contribute unigram factors,
// later positions the transition factor
//   p(a | N_i, N_{i-1}, ...) / (prod_o ratio_{i-o}(a) * p(a)).
double markov_log_score(const TransitionModel& tm, const PositionModel& pm,
                        const std::vector<int>& seq, int label);
Label markov_classify(const TransitionModel& tm, const PositionModel& pm,
                      const std::vector<int>& seq);

// The per-position transition factors at a=1; length k - order.
std::vector<double> sequence_feature_vector(const TransitionModel& tm, const PositionModel& pm,
                                            const std::vector<int>& seq);

enum class BaseFamily { Frequency, Position, Sequence };

struct PositionHyper {
    int k = 10;
    int component_count = 5;
    Sampling method = Sampling::Last;
    TrainConfig svm;
};

struct SequenceHyper {
    int k = 8;
    int component_count = 5;
    Sampling method = Sampling::Maximum;
    int order = 1;
    TrainConfig svm;
};

struct StackingOptions {
    std::vector<BaseFamily> bases; // deduplicated, canonical order F, P, S
    TrainConfig fabs_svm;
    TrainConfig frel_svm;
    PositionHyper position;
    SequenceHyper sequence;
    std::vector<double> meta_cost_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
    bool meta_balanced_grid = true; // also try balanced class weights
    int folds = 5;
    int epochs = 200;
    std::uint64_t seed = 0;
};

struct StackingModel {
    std::vector<BaseFamily> bases;
    BiasType bias_type = BiasType::Any;
    std::optional<LinearModel> fabs_svm;
    std::optional<LinearModel> frel_svm;
    std::optional<PositionModel> position_pm;
    std::optional<LinearModel> position_svm;
    std::optional<PositionModel> sequence_pm;
    std::optional<TransitionModel> sequence_tm;
    std::optional<LinearModel> sequence_svm;
    LinearModel meta;

    // Base decision scores in canonical order; the meta model's input.
    std::vector<double> base_scores(const std::vector<int>& seq) const;
    double decision_score(const std::vector<int>& seq) const;
    Label classify(const std::vector<int>& seq) const;
};

// Base pipelines are trained per family; the meta SVM learns from k-fold
// out-of-fold base scores on the training split. The validation split is
// used only to pick the meta SVM's cost / class weighting.
StackingModel train_stacking(const std::vector<const Article*>& train,
                             const std::vector<const Article*>& validation, BiasType bt,
                             const StackingOptions& options);

} // namespace mbd

#endif
