#ifndef MBD_LINEAR_HPP
#define MBD_LINEAR_HPP

#include <cstdint>
#include <vector>

namespace mbd {

enum class LinearKind { SvmHinge, Logistic };

struct Feature {
    int id = 0;
    double value = 0.0;
    bool operator==(const Feature&) const = default;
};
using FeatureVector = std::vector<Feature>;

FeatureVector dense_features(const std::vector<double>& values);

struct LinearModel {
    std::vector<double> weights; // indexed by feature id
    double intercept = 0.0;
    LinearKind kind = LinearKind::SvmHinge;
};

struct TrainConfig {
    double cost = 1.0;          // C > 0; lambda = 1 / (C * N)
    double weight_bias = 1.0;   // loss scale for label 1
    double weight_neutral = 1.0;
    int epochs = 200;
    std::uint64_t seed = 0;
};

// Balanced class weights: inverse class frequency, normalized so the mean
// example weight is 1.
TrainConfig balanced_weights(TrainConfig cfg, const std::vector<int>& y);

// Epoch-shuffled stochastic subgradient descent with suffix averaging.
// Labels are 1 = bias, 0 = neutral; both classes must be present.
LinearModel train_linear(const std::vector<FeatureVector>& X, const std::vector<int>& y,
                         LinearKind kind, const TrainConfig& cfg);

// Regularized average loss of the model on (X, y); used to pick the best
// iterate and exposed for tests.
double objective(const LinearModel& model, const std::vector<FeatureVector>& X,
                 const std::vector<int>& y, const TrainConfig& cfg);

double decision(const LinearModel& model, const FeatureVector& x);

// 1 = bias iff the decision score is >= 0.
int predict(const LinearModel& model, const FeatureVector& x);

} // namespace mbd

#endif
