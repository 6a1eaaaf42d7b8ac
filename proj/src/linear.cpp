#include "mbd/linear.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mbd/error.hpp"
#include "mbd/rng.hpp"

namespace mbd {

FeatureVector dense_features(const std::vector<double>& values) {
    FeatureVector out;
    out.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        out.push_back({static_cast<int>(i), values[i]});
    return out;
}

TrainConfig balanced_weights(TrainConfig cfg, const std::vector<int>& y) {
    double n_bias = static_cast<double>(std::count(y.begin(), y.end(), 1));
    double n_neutral = static_cast<double>(y.size()) - n_bias;
    double n = static_cast<double>(y.size());
    cfg.weight_bias = n_bias > 0 ? n / (2.0 * n_bias) : 1.0;
    cfg.weight_neutral = n_neutral > 0 ? n / (2.0 * n_neutral) : 1.0;
    return cfg;
}

double decision(const LinearModel& model, const FeatureVector& x) {
    double score = model.intercept;
    for (const Feature& f : x)
        if (f.id >= 0 && f.id < static_cast<int>(model.weights.size()))
            score += model.weights[f.id] * f.value;
    return score;
}

int predict(const LinearModel& model, const FeatureVector& x) {
    return decision(model, x) >= 0.0 ? 1 : 0;
}

double objective(const LinearModel& model, const std::vector<FeatureVector>& X,
                 const std::vector<int>& y, const TrainConfig& cfg) {
    const double n = static_cast<double>(X.size());
    const double lambda = 1.0 / (cfg.cost * n);
    double reg = 0.0;
    for (double w : model.weights) reg += w * w;
    reg *= 0.5 * lambda;

    double loss = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        double s = y[i] == 1 ? 1.0 : -1.0;
        double cw = y[i] == 1 ? cfg.weight_bias : cfg.weight_neutral;
        double margin = s * decision(model, X[i]);
        if (model.kind == LinearKind::SvmHinge)
            loss += cw * std::max(0.0, 1.0 - margin);
        else
            loss += cw * (margin < 0.0 ? -margin + std::log1p(std::exp(margin))
                                       : std::log1p(std::exp(-margin)));
    }
    return reg + loss / n;
}

LinearModel train_linear(const std::vector<FeatureVector>& X, const std::vector<int>& y,
                         LinearKind kind, const TrainConfig& cfg) {
    if (X.size() != y.size()) throw ValidationError("train_linear: |X| != |y|");
    if (X.size() < 2) throw ValidationError("train_linear: need at least 2 examples");
    if (cfg.cost <= 0.0) throw ValidationError("train_linear: cost must be > 0");
    if (cfg.weight_bias <= 0.0 || cfg.weight_neutral <= 0.0)
        throw ValidationError("train_linear: class weights must be > 0");

    bool has_bias = false, has_neutral = false;
    int dim = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        (y[i] == 1 ? has_bias : has_neutral) = true;
        for (const Feature& f : X[i]) {
            if (f.id < 0) throw ValidationError("train_linear: negative feature id");
            if (!std::isfinite(f.value))
                throw ValidationError("train_linear: non-finite feature value");
            dim = std::max(dim, f.id + 1);
        }
    }
    if (!has_bias || !has_neutral)
        throw ValidationError("train_linear: both classes must be present");

    const std::size_t n = X.size();
    const double lambda = 1.0 / (cfg.cost * static_cast<double>(n));
    const std::size_t total_steps = static_cast<std::size_t>(cfg.epochs) * n;
    const std::size_t avg_from = total_steps / 2; // suffix averaging

    LinearModel cur{std::vector<double>(dim, 0.0), 0.0, kind};
    LinearModel avg{std::vector<double>(dim, 0.0), 0.0, kind};
    std::size_t avg_count = 0;

    Rng rng(cfg.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    std::size_t t = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t idx : order) {
            ++t;
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const FeatureVector& x = X[idx];
            const double s = y[idx] == 1 ? 1.0 : -1.0;
            const double cw = y[idx] == 1 ? cfg.weight_bias : cfg.weight_neutral;

            double margin = s * decision(cur, x);
            double shrink = 1.0 - eta * lambda;
            for (double& w : cur.weights) w *= shrink;

            double step = 0.0;
            if (kind == LinearKind::SvmHinge) {
                if (margin < 1.0) step = eta * cw * s;
            } else {
                double p = 1.0 / (1.0 + std::exp(margin)); // sigmoid(-margin)
                step = eta * cw * s * p;
            }
            if (step != 0.0) {
                for (const Feature& f : x) cur.weights[f.id] += step * f.value;
                cur.intercept += step; // the intercept is not regularized
            }

            if (t > avg_from) {
                for (int d = 0; d < dim; ++d) avg.weights[d] += cur.weights[d];
                avg.intercept += cur.intercept;
                ++avg_count;
            }
        }
    }
    if (avg_count > 0) {
        for (double& w : avg.weights) w /= static_cast<double>(avg_count);
        avg.intercept /= static_cast<double>(avg_count);
    }

    // Keep the best candidate by true objective; the zero model bounds it.
    LinearModel zero{std::vector<double>(dim, 0.0), 0.0, kind};
    LinearModel* best = &avg;
    double best_obj = objective(avg, X, y, cfg);
    if (double o = objective(cur, X, y, cfg); o < best_obj) {
        best_obj = o;
        best = &cur;
    }
    if (objective(zero, X, y, cfg) < best_obj) best = &zero;
    return *best;
}

} // namespace mbd
