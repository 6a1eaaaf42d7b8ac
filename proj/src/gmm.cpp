#include "mbd/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mbd/error.hpp"
#include "mbd/rng.hpp"

namespace mbd {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;

double log_sum_exp(const std::vector<double>& v) {
    double mx = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(mx)) return mx;
    double sum = 0.0;
    for (double x : v) sum += std::exp(x - mx);
    return mx + std::log(sum);
}

// k-means++ seeding on the raw samples.
std::vector<double> pick_centers(const std::vector<double>& samples, int count, Rng& rng) {
    std::vector<double> centers;
    centers.reserve(count);
    centers.push_back(samples[rng.next_index(samples.size())]);
    std::vector<double> dist2(samples.size());
    while (static_cast<int>(centers.size()) < count) {
        double total = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (double c : centers) best = std::min(best, (samples[i] - c) * (samples[i] - c));
            dist2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            centers.push_back(samples[rng.next_index(samples.size())]);
            continue;
        }
        double u = rng.next_unit() * total;
        std::size_t pick = samples.size() - 1;
        double acc = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            acc += dist2[i];
            if (u < acc) {
                pick = i;
                break;
            }
        }
        centers.push_back(samples[pick]);
    }
    return centers;
}

Gmm run_em(const std::vector<double>& samples, int L, Rng& rng, const GmmFitOptions& opt) {
    const std::size_t n = samples.size();
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double x : samples) var += (x - mean) * (x - mean);
    var = std::max(var / static_cast<double>(n), opt.variance_floor);

    Gmm gmm;
    gmm.components.resize(L);
    std::vector<double> centers = pick_centers(samples, L, rng);
    for (int l = 0; l < L; ++l)
        gmm.components[l] = GaussComponent{centers[l], var, 1.0 / L};

    std::vector<std::vector<double>> resp(L, std::vector<double>(n));
    std::vector<double> logs(L);
    double prev_ll = -std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        // E-step, with the log-likelihood of the current parameters
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (int l = 0; l < L; ++l) {
                const GaussComponent& c = gmm.components[l];
                logs[l] = std::log(c.weight) + log_normal_pdf(samples[i], c.mean, c.variance);
            }
            double norm = log_sum_exp(logs);
            ll += norm;
            for (int l = 0; l < L; ++l) resp[l][i] = std::exp(logs[l] - norm);
        }
        gmm.log_likelihood_trace.push_back(ll);
        if (ll - prev_ll <= opt.tol * std::max(1.0, std::abs(prev_ll)) && iter > 0) break;
        prev_ll = ll;

        // M-step; flooring the variance is the maximizer of the constrained
        // problem, so the trace stays non-decreasing
        for (int l = 0; l < L; ++l) {
            double r_sum = 0.0, x_sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                r_sum += resp[l][i];
                x_sum += resp[l][i] * samples[i];
            }
            GaussComponent& c = gmm.components[l];
            c.weight = r_sum / static_cast<double>(n);
            if (r_sum > 0.0) {
                c.mean = x_sum / r_sum;
                double v_sum = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    v_sum += resp[l][i] * (samples[i] - c.mean) * (samples[i] - c.mean);
                c.variance = std::max(v_sum / r_sum, opt.variance_floor);
            } else {
                c.variance = std::max(c.variance, opt.variance_floor);
            }
        }
    }
    return gmm;
}

} // namespace

double normal_pdf(double x, double mean, double variance) {
    return std::exp(log_normal_pdf(x, mean, variance));
}

double log_normal_pdf(double x, double mean, double variance) {
    double d = x - mean;
    return -0.5 * (kLog2Pi + std::log(variance) + d * d / variance);
}

double log_likelihood(const Gmm& gmm, const std::vector<double>& samples) {
    double ll = 0.0;
    std::vector<double> logs(gmm.components.size());
    for (double x : samples) {
        for (std::size_t l = 0; l < gmm.components.size(); ++l) {
            const GaussComponent& c = gmm.components[l];
            logs[l] = std::log(c.weight) + log_normal_pdf(x, c.mean, c.variance);
        }
        ll += log_sum_exp(logs);
    }
    return ll;
}

Gmm fit_gmm(const std::vector<double>& samples, int component_count, std::uint64_t seed,
            const GmmFitOptions& options) {
    if (samples.empty()) throw ValidationError("fit_gmm: empty sample set");
    if (component_count < 1) throw ValidationError("fit_gmm: component count must be >= 1");

    Gmm best;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < options.restarts; ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
        Gmm candidate = run_em(samples, component_count, rng, options);
        double ll = candidate.log_likelihood_trace.back();
        if (ll > best_ll) {
            best_ll = ll;
            best = std::move(candidate);
        }
    }
    std::stable_sort(best.components.begin(), best.components.end(),
                     [](const GaussComponent& a, const GaussComponent& b) {
                         return a.mean < b.mean;
                     });
    return best;
}

int assign_component(const Gmm& gmm, double x) {
    int best = 0;
    double best_density = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < gmm.components.size(); ++l) {
        const GaussComponent& c = gmm.components[l];
        double density = c.weight * normal_pdf(x, c.mean, c.variance);
        if (density > best_density) {
            best_density = density;
            best = static_cast<int>(l);
        }
    }
    return best;
}

ComponentBiasTable component_bias(const Gmm& gmm,
                                  const std::vector<std::pair<double, int>>& labeled_samples) {
    const std::size_t L = gmm.components.size();
    std::vector<double> total(L, 0.0), biased(L, 0.0);
    std::size_t bias_count = 0;
    for (const auto& [x, label] : labeled_samples) {
        int l = assign_component(gmm, x);
        total[l] += 1.0;
        if (label == 1) {
            biased[l] += 1.0;
            ++bias_count;
        }
    }
    ComponentBiasTable table;
    table.bias_posterior.resize(L);
    for (std::size_t l = 0; l < L; ++l)
        table.bias_posterior[l] = (biased[l] + 1.0) / (total[l] + 2.0);
    table.bias_prior = labeled_samples.empty()
                           ? 0.5
                           : static_cast<double>(bias_count) / labeled_samples.size();
    return table;
}

double likelihood_ratio(const ComponentBiasTable& table, const Gmm& gmm, double x, int label) {
    double p = table.bias_posterior[assign_component(gmm, x)];
    double prior = table.bias_prior;
    return label == 1 ? p / prior : (1.0 - p) / (1.0 - prior);
}

} // namespace mbd
