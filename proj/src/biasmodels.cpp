#include "mbd/biasmodels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mbd/error.hpp"
#include "mbd/rng.hpp"

namespace mbd {

FrequencyFeatures frequency_features(const std::vector<int>& seq) {
    if (seq.empty()) throw ValidationError("frequency_features: empty sequence");
    FrequencyFeatures f;
    for (int b : seq) f.f_abs += b;
    f.f_rel = static_cast<double>(f.f_abs) / static_cast<double>(seq.size());
    return f;
}

PositionModel train_position_model(const std::vector<const Article*>& train, BiasType bt, int k,
                                   int component_count, Sampling method, std::uint64_t seed) {
    if (train.empty()) throw ValidationError("train_position_model: empty training split");
    if (k < 1) throw ValidationError("train_position_model: k must be >= 1");
    if (component_count < 1)
        throw ValidationError("train_position_model: component count must be >= 1");

    std::size_t bias_count = 0;
    for (const Article* a : train)
        if (a->label == Label::Bias) ++bias_count;
    if (bias_count == 0 || bias_count == train.size())
        throw ValidationError("train_position_model: training split must contain both labels");

    PositionModel pm;
    pm.k = k;
    pm.component_count = component_count;
    pm.method = method;
    pm.bias_type = bt;
    pm.bias_prior = static_cast<double>(bias_count) / static_cast<double>(train.size());
    pm.positions.resize(k);

    std::vector<std::vector<double>> values(train.size());
    std::vector<int> labels(train.size());
    for (std::size_t j = 0; j < train.size(); ++j) {
        values[j] = normalize(bias_sequence(*train[j], bt), k, method, pm.m).values;
        labels[j] = train[j]->label == Label::Bias ? 1 : 0;
    }

    for (int i = 0; i < k; ++i) {
        PositionSlot& slot = pm.positions[i];
        slot.samples.reserve(train.size());
        for (std::size_t j = 0; j < train.size(); ++j) slot.samples.push_back(values[j][i]);
        slot.gmm = fit_gmm(slot.samples, component_count,
                           derive_seed(seed, static_cast<std::uint64_t>(i)));
        std::vector<std::pair<double, int>> labeled;
        labeled.reserve(train.size());
        for (std::size_t j = 0; j < train.size(); ++j) labeled.emplace_back(values[j][i], labels[j]);
        slot.table = component_bias(slot.gmm, labeled);
        slot.table.bias_prior = pm.bias_prior;
    }
    return pm;
}

double nb_log_score(const PositionModel& pm, const std::vector<int>& seq, int label) {
    const NormalizedSequence norm = pm.normalized(seq);
    double prior = label == 1 ? pm.bias_prior : 1.0 - pm.bias_prior;
    double score = std::log(prior);
    for (int i = 0; i < pm.k; ++i) {
        const PositionSlot& slot = pm.positions[i];
        score += std::log(likelihood_ratio(slot.table, slot.gmm, norm.values[i], label));
    }
    return score;
}

Label nb_classify(const PositionModel& pm, const std::vector<int>& seq) {
    return nb_log_score(pm, seq, 1) >= nb_log_score(pm, seq, 0) ? Label::Bias : Label::Neutral;
}

std::vector<double> position_feature_vector(const PositionModel& pm, const std::vector<int>& seq) {
    const NormalizedSequence norm = pm.normalized(seq);
    std::vector<double> out(pm.k);
    for (int i = 0; i < pm.k; ++i) {
        const PositionSlot& slot = pm.positions[i];
        out[i] = slot.table.bias_posterior[assign_component(slot.gmm, norm.values[i])];
    }
    return out;
}

std::size_t TransitionModel::context_count() const {
    std::size_t n = 1;
    for (int o = 0; o <= order; ++o) n *= static_cast<std::size_t>(component_count);
    return n;
}

double TransitionModel::entry(int position, const std::vector<int>& assignments) const {
    std::size_t ctx = 0;
    for (int o = order; o >= 0; --o)
        ctx = ctx * static_cast<std::size_t>(component_count) +
              static_cast<std::size_t>(assignments[position - o]);
    return bias_posterior[position - order][ctx];
}

TransitionModel train_transition_model(const std::vector<const Article*>& train, BiasType bt,
                                       const PositionModel& pm, int order,
                                       std::uint64_t /*seed*/) {
    if (order < 1 || order > 2)
        throw ValidationError("train_transition_model: order must be 1 or 2");
    if (order >= pm.k)
        throw ValidationError("train_transition_model: order (" + std::to_string(order) +
                              ") must be < k (" + std::to_string(pm.k) + ")");

    TransitionModel tm;
    tm.order = order;
    tm.k = pm.k;
    tm.component_count = pm.component_count;
    const std::size_t contexts = tm.context_count();
    std::vector<std::vector<double>> total(pm.k - order, std::vector<double>(contexts, 0.0));
    std::vector<std::vector<double>> biased(pm.k - order, std::vector<double>(contexts, 0.0));

    for (const Article* a : train) {
        const NormalizedSequence norm = pm.normalized(bias_sequence(*a, bt));
        std::vector<int> assign(pm.k);
        for (int i = 0; i < pm.k; ++i)
            assign[i] = assign_component(pm.positions[i].gmm, norm.values[i]);
        for (int i = order; i < pm.k; ++i) {
            std::size_t ctx = 0;
            for (int o = order; o >= 0; --o)
                ctx = ctx * static_cast<std::size_t>(tm.component_count) +
                      static_cast<std::size_t>(assign[i - o]);
            total[i - order][ctx] += 1.0;
            if (a->label == Label::Bias) biased[i - order][ctx] += 1.0;
        }
    }

    tm.bias_posterior.resize(pm.k - order, std::vector<double>(contexts, 0.5));
    for (int i = 0; i < pm.k - order; ++i)
        for (std::size_t c = 0; c < contexts; ++c)
            tm.bias_posterior[i][c] = (biased[i][c] + 1.0) / (total[i][c] + 2.0);
    return tm;
}

double markov_log_score(const TransitionModel& tm, const PositionModel& pm,
                        const std::vector<int>& seq, int label) {
    if (tm.k != pm.k)
        throw ValidationError("markov_log_score: transition and position models disagree on k");
    const NormalizedSequence norm = pm.normalized(seq);
    std::vector<int> assign(pm.k);
    std::vector<double> ratio(pm.k);
    for (int i = 0; i < pm.k; ++i) {
        const PositionSlot& slot = pm.positions[i];
        assign[i] = assign_component(slot.gmm, norm.values[i]);
        ratio[i] = likelihood_ratio(slot.table, slot.gmm, norm.values[i], label);
    }
    const double prior = label == 1 ? pm.bias_prior : 1.0 - pm.bias_prior;
    double score = std::log(prior);
    for (int i = 0; i < tm.order; ++i) score += std::log(ratio[i]);
    for (int i = tm.order; i < pm.k; ++i) {
        double t = tm.entry(i, assign);
        double numer = label == 1 ? t : 1.0 - t;
        double denom = prior;
        for (int o = 1; o <= tm.order; ++o) denom *= ratio[i - o];
        score += std::log(numer) - std::log(denom);
    }
    return score;
}

Label markov_classify(const TransitionModel& tm, const PositionModel& pm,
                      const std::vector<int>& seq) {
    return markov_log_score(tm, pm, seq, 1) >= markov_log_score(tm, pm, seq, 0)
               ? Label::Bias
               : Label::Neutral;
}

std::vector<double> sequence_feature_vector(const TransitionModel& tm, const PositionModel& pm,
                                            const std::vector<int>& seq) {
    const NormalizedSequence norm = pm.normalized(seq);
    std::vector<int> assign(pm.k);
    std::vector<double> ratio(pm.k);
    for (int i = 0; i < pm.k; ++i) {
        const PositionSlot& slot = pm.positions[i];
        assign[i] = assign_component(slot.gmm, norm.values[i]);
        ratio[i] = likelihood_ratio(slot.table, slot.gmm, norm.values[i], 1);
    }
    std::vector<double> out;
    out.reserve(pm.k - tm.order);
    for (int i = tm.order; i < pm.k; ++i) {
        double denom = pm.bias_prior;
        for (int o = 1; o <= tm.order; ++o) denom *= ratio[i - o];
        out.push_back(tm.entry(i, assign) / denom);
    }
    return out;
}

namespace {

std::vector<BaseFamily> canonical_bases(std::vector<BaseFamily> bases) {
    std::set<BaseFamily> unique(bases.begin(), bases.end());
    std::vector<BaseFamily> out;
    for (BaseFamily f : {BaseFamily::Frequency, BaseFamily::Position, BaseFamily::Sequence})
        if (unique.count(f)) out.push_back(f);
    return out;
}

struct BasePipelines {
    std::optional<LinearModel> fabs_svm;
    std::optional<LinearModel> frel_svm;
    std::optional<PositionModel> position_pm;
    std::optional<LinearModel> position_svm;
    std::optional<PositionModel> sequence_pm;
    std::optional<TransitionModel> sequence_tm;
    std::optional<LinearModel> sequence_svm;
};

std::vector<int> labels_of(const std::vector<const Article*>& articles) {
    std::vector<int> y;
    y.reserve(articles.size());
    for (const Article* a : articles) y.push_back(a->label == Label::Bias ? 1 : 0);
    return y;
}

BasePipelines train_bases(const std::vector<const Article*>& train, BiasType bt,
                          const std::vector<BaseFamily>& bases, const StackingOptions& opt,
                          std::uint64_t seed) {
    BasePipelines out;
    const std::vector<int> y = labels_of(train);
    for (BaseFamily family : bases) {
        switch (family) {
        case BaseFamily::Frequency: {
            std::vector<FeatureVector> fabs, frel;
            for (const Article* a : train) {
                FrequencyFeatures f = frequency_features(bias_sequence(*a, bt));
                fabs.push_back({{0, static_cast<double>(f.f_abs)}});
                frel.push_back({{0, f.f_rel}});
            }
            TrainConfig cfg = opt.fabs_svm;
            cfg.seed = derive_seed(seed, 1);
            out.fabs_svm = train_linear(fabs, y, LinearKind::SvmHinge, cfg);
            cfg = opt.frel_svm;
            cfg.seed = derive_seed(seed, 2);
            out.frel_svm = train_linear(frel, y, LinearKind::SvmHinge, cfg);
            break;
        }
        case BaseFamily::Position: {
            out.position_pm =
                train_position_model(train, bt, opt.position.k, opt.position.component_count,
                                     opt.position.method, derive_seed(seed, 3));
            std::vector<FeatureVector> X;
            for (const Article* a : train)
                X.push_back(
                    dense_features(position_feature_vector(*out.position_pm, bias_sequence(*a, bt))));
            TrainConfig cfg = opt.position.svm;
            cfg.seed = derive_seed(seed, 4);
            out.position_svm = train_linear(X, y, LinearKind::SvmHinge, cfg);
            break;
        }
        case BaseFamily::Sequence: {
            out.sequence_pm =
                train_position_model(train, bt, opt.sequence.k, opt.sequence.component_count,
                                     opt.sequence.method, derive_seed(seed, 5));
            out.sequence_tm = train_transition_model(train, bt, *out.sequence_pm,
                                                     opt.sequence.order, derive_seed(seed, 6));
            std::vector<FeatureVector> X;
            for (const Article* a : train)
                X.push_back(dense_features(
                    sequence_feature_vector(*out.sequence_tm, *out.sequence_pm, bias_sequence(*a, bt))));
            TrainConfig cfg = opt.sequence.svm;
            cfg.seed = derive_seed(seed, 7);
            out.sequence_svm = train_linear(X, y, LinearKind::SvmHinge, cfg);
            break;
        }
        }
    }
    return out;
}

std::vector<double> base_scores_of(const BasePipelines& bases,
                                   const std::vector<BaseFamily>& order, BiasType bt,
                                   const Article& article) {
    const std::vector<int> seq = bias_sequence(article, bt);
    std::vector<double> scores;
    for (BaseFamily family : order) {
        switch (family) {
        case BaseFamily::Frequency: {
            FrequencyFeatures f = frequency_features(seq);
            scores.push_back(decision(*bases.fabs_svm, {{0, static_cast<double>(f.f_abs)}}));
            scores.push_back(decision(*bases.frel_svm, {{0, f.f_rel}}));
            break;
        }
        case BaseFamily::Position:
            scores.push_back(decision(*bases.position_svm,
                                      dense_features(position_feature_vector(*bases.position_pm, seq))));
            break;
        case BaseFamily::Sequence:
            scores.push_back(decision(
                *bases.sequence_svm,
                dense_features(sequence_feature_vector(*bases.sequence_tm, *bases.sequence_pm, seq))));
            break;
        }
    }
    return scores;
}

} // namespace

std::vector<double> StackingModel::base_scores(const std::vector<int>& seq) const {
    std::vector<double> scores;
    for (BaseFamily family : bases) {
        switch (family) {
        case BaseFamily::Frequency: {
            FrequencyFeatures f = frequency_features(seq);
            scores.push_back(decision(*fabs_svm, {{0, static_cast<double>(f.f_abs)}}));
            scores.push_back(decision(*frel_svm, {{0, f.f_rel}}));
            break;
        }
        case BaseFamily::Position:
            scores.push_back(decision(*position_svm,
                                      dense_features(position_feature_vector(*position_pm, seq))));
            break;
        case BaseFamily::Sequence:
            scores.push_back(decision(
                *sequence_svm, dense_features(sequence_feature_vector(*sequence_tm, *sequence_pm, seq))));
            break;
        }
    }
    return scores;
}

double StackingModel::decision_score(const std::vector<int>& seq) const {
    return decision(meta, dense_features(base_scores(seq)));
}

Label StackingModel::classify(const std::vector<int>& seq) const {
    return decision_score(seq) >= 0.0 ? Label::Bias : Label::Neutral;
}

StackingModel train_stacking(const std::vector<const Article*>& train,
                             const std::vector<const Article*>& validation, BiasType bt,
                             const StackingOptions& options) {
    const std::vector<BaseFamily> bases = canonical_bases(options.bases);
    if (bases.empty()) throw ValidationError("train_stacking: base set must be non-empty");
    if (options.folds < 2) throw ValidationError("train_stacking: need at least 2 folds");
    if (train.size() < static_cast<std::size_t>(options.folds))
        throw ValidationError("train_stacking: fewer training articles than folds");

    // Deterministic fold assignment: shuffled round-robin.
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(options.seed, 0x0f01d));
    rng.shuffle(order);
    std::vector<int> fold_of(train.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos)
        fold_of[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(options.folds));

    // Out-of-fold base scores for the meta model.
    std::vector<std::vector<double>> oof(train.size());
    for (int f = 0; f < options.folds; ++f) {
        std::vector<const Article*> fold_train;
        for (std::size_t i = 0; i < train.size(); ++i)
            if (fold_of[i] != f) fold_train.push_back(train[i]);
        BasePipelines fold_bases =
            train_bases(fold_train, bt, bases, options,
                        derive_seed(options.seed, 100 + static_cast<std::uint64_t>(f)));
        for (std::size_t i = 0; i < train.size(); ++i)
            if (fold_of[i] == f) oof[i] = base_scores_of(fold_bases, bases, bt, *train[i]);
    }

    StackingModel model;
    model.bases = bases;
    model.bias_type = bt;
    BasePipelines full = train_bases(train, bt, bases, options, derive_seed(options.seed, 200));
    model.fabs_svm = std::move(full.fabs_svm);
    model.frel_svm = std::move(full.frel_svm);
    model.position_pm = std::move(full.position_pm);
    model.position_svm = std::move(full.position_svm);
    model.sequence_pm = std::move(full.sequence_pm);
    model.sequence_tm = std::move(full.sequence_tm);
    model.sequence_svm = std::move(full.sequence_svm);

    std::vector<FeatureVector> meta_X;
    meta_X.reserve(train.size());
    for (const std::vector<double>& scores : oof) meta_X.push_back(dense_features(scores));
    const std::vector<int> meta_y = labels_of(train);

    // Meta hyperparameters picked on the validation split.
    double best_acc = -1.0;
    LinearModel best_meta;
    int candidate_idx = 0;
    for (double c : options.meta_cost_grid) {
        for (int balanced = 0; balanced <= (options.meta_balanced_grid ? 1 : 0); ++balanced) {
            TrainConfig cfg;
            cfg.cost = c;
            cfg.epochs = options.epochs;
            cfg.seed = derive_seed(options.seed, 300 + static_cast<std::uint64_t>(candidate_idx++));
            if (balanced) cfg = balanced_weights(cfg, meta_y);
            LinearModel meta = train_linear(meta_X, meta_y, LinearKind::SvmHinge, cfg);
            model.meta = meta;
            double correct = 0.0;
            for (const Article* a : validation) {
                Label got = model.classify(bias_sequence(*a, bt));
                if (got == a->label) correct += 1.0;
            }
            double acc = validation.empty() ? 0.0 : correct / static_cast<double>(validation.size());
            if (acc > best_acc) {
                best_acc = acc;
                best_meta = meta;
            }
        }
    }
    model.meta = best_meta;
    return model;
}

} // namespace mbd
