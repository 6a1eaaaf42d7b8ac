#ifndef MBD_GMM_HPP
#define MBD_GMM_HPP

#include <cstdint>
#include <utility>
#include <vector>

namespace mbd {

struct GaussComponent {
    double mean = 0.0;
    double variance = 1.0; // floored, never below GmmFitOptions::variance_floor
    double weight = 1.0;
};

struct Gmm {
    std::vector<GaussComponent> components; // sorted by mean after fitting
    std::vector<double> log_likelihood_trace; // one entry per EM iteration, non-decreasing
};

struct GmmFitOptions {
    double tol = 1e-6; // relative log-likelihood improvement
    int max_iterations = 200;
    int restarts = 5;
    double variance_floor = 1e-4;
};

double normal_pdf(double x, double mean, double variance);
double log_normal_pdf(double x, double mean, double variance);

// EM fit of a 1-D mixture with k-means++ initialization and the best of
// `restarts` runs kept. Deterministic given the seed. More components than
// distinct sample values is allowed; the variance floor keeps the fit finite.
Gmm fit_gmm(const std::vector<double>& samples, int component_count, std::uint64_t seed,
            const GmmFitOptions& options = {});

// Index of the component most likely to have generated x
// (argmax of weight * pdf, ties to the lowest index).
int assign_component(const Gmm& gmm, double x);

double log_likelihood(const Gmm& gmm, const std::vector<double>& samples);

// Per-component label posteriors with add-one smoothing, plus the unsmoothed
// label prior. Labels are 1 = bias, 0 = neutral.
struct ComponentBiasTable {
    std::vector<double> bias_posterior; // p(a=1 | component l), strictly in (0,1)
    double bias_prior = 0.5;            // p(a=1), unsmoothed
};

ComponentBiasTable component_bias(const Gmm& gmm,
                                  const std::vector<std::pair<double, int>>& labeled_samples);

// p(a | N(x)) / p(a), the position-wise surrogate for p(x | a).
double likelihood_ratio(const ComponentBiasTable& table, const Gmm& gmm, double x, int label);

} // namespace mbd

#endif
