#ifndef MBD_TESTS_ORACLE_HPP
#define MBD_TESTS_ORACLE_HPP

// Brute-force re-evaluation of the position Naive Bayes and Markov-chain
// scoring rules, written independently of the library implementation: plain
// linear-space products, direct table lookups, own density function. Used to
// pin the classifiers to the stated formulas.

#include <cmath>
#include <vector>

#include "mbd/biasmodels.hpp"
#include "mbd/resample.hpp"
#include "mbd/rng.hpp"

namespace mbd::testing {

inline double oracle_pdf(double x, double mean, double variance) {
    const double pi = 3.14159265358979323846;
    return std::exp(-(x - mean) * (x - mean) / (2.0 * variance)) /
           std::sqrt(2.0 * pi * variance);
}

inline int oracle_assign(const Gmm& gmm, double x) {
    int best = 0;
    double best_density = -1.0;
    for (std::size_t l = 0; l < gmm.components.size(); ++l) {
        double d = gmm.components[l].weight *
                   oracle_pdf(x, gmm.components[l].mean, gmm.components[l].variance);
        if (d > best_density) {
            best_density = d;
            best = static_cast<int>(l);
        }
    }
    return best;
}

inline double oracle_ratio(const PositionSlot& slot, double bias_prior, double x, int label) {
    double p = slot.table.bias_posterior[oracle_assign(slot.gmm, x)];
    return label == 1 ? p / bias_prior : (1.0 - p) / (1.0 - bias_prior);
}

// p(a) * prod_i p(a|N_i)/p(a), returned in log space.
inline double oracle_nb_log_score(const PositionModel& pm, const std::vector<int>& seq,
                                  int label) {
    const std::vector<double> values = normalize(seq, pm.k, pm.method, pm.m).values;
    double prior = label == 1 ? pm.bias_prior : 1.0 - pm.bias_prior;
    double product = prior;
    for (int i = 0; i < pm.k; ++i)
        product *= oracle_ratio(pm.positions[i], pm.bias_prior, values[i], label);
    return std::log(product);
}

inline int oracle_nb_argmax(const PositionModel& pm, const std::vector<int>& seq) {
    return oracle_nb_log_score(pm, seq, 1) >= oracle_nb_log_score(pm, seq, 0) ? 1 : 0;
}

// p(a) * prod_{i<order} ratio_i * prod_{i>=order}
//   p(a|N_i..N_{i-order}) / (p(a) * prod_o ratio_{i-o}), in log space.
inline double oracle_markov_log_score(const TransitionModel& tm, const PositionModel& pm,
                                      const std::vector<int>& seq, int label) {
    const std::vector<double> values = normalize(seq, pm.k, pm.method, pm.m).values;
    double prior = label == 1 ? pm.bias_prior : 1.0 - pm.bias_prior;
    std::vector<int> assign(pm.k);
    for (int i = 0; i < pm.k; ++i) assign[i] = oracle_assign(pm.positions[i].gmm, values[i]);

    double product = prior;
    for (int i = 0; i < tm.order; ++i)
        product *= oracle_ratio(pm.positions[i], pm.bias_prior, values[i], label);
    for (int i = tm.order; i < pm.k; ++i) {
        std::size_t ctx = 0;
        for (int o = tm.order; o >= 0; --o)
            ctx = ctx * static_cast<std::size_t>(tm.component_count) +
                  static_cast<std::size_t>(assign[i - o]);
        double table = tm.bias_posterior[i - tm.order][ctx];
        double numer = label == 1 ? table : 1.0 - table;
        double denom = prior;
        for (int o = 1; o <= tm.order; ++o)
            denom *= oracle_ratio(pm.positions[i - o], pm.bias_prior, values[i - o], label);
        product *= numer / denom;
    }
    return std::log(product);
}

inline int oracle_markov_argmax(const TransitionModel& tm, const PositionModel& pm,
                                const std::vector<int>& seq) {
    return oracle_markov_log_score(tm, pm, seq, 1) >= oracle_markov_log_score(tm, pm, seq, 0)
               ? 1
               : 0;
}

// Hand-built models with externally chosen parameters, bypassing fitting.
inline PositionModel hand_position_model(int k, int components, Sampling method,
                                         double bias_prior, Rng& rng) {
    PositionModel pm;
    pm.k = k;
    pm.component_count = components;
    pm.method = method;
    pm.bias_type = BiasType::Any;
    pm.bias_prior = bias_prior;
    pm.positions.resize(k);
    for (int i = 0; i < k; ++i) {
        PositionSlot& slot = pm.positions[i];
        for (int l = 0; l < components; ++l) {
            GaussComponent c;
            c.mean = (l + rng.next_unit()) / components;
            c.variance = 0.01 + 0.05 * rng.next_unit();
            c.weight = 1.0 / components;
            slot.gmm.components.push_back(c);
        }
        slot.table.bias_prior = bias_prior;
        for (int l = 0; l < components; ++l)
            slot.table.bias_posterior.push_back(0.1 + 0.8 * rng.next_unit());
    }
    return pm;
}

inline TransitionModel hand_transition_model(const PositionModel& pm, int order, Rng& rng) {
    TransitionModel tm;
    tm.order = order;
    tm.k = pm.k;
    tm.component_count = pm.component_count;
    std::size_t contexts = 1;
    for (int o = 0; o <= order; ++o) contexts *= static_cast<std::size_t>(pm.component_count);
    tm.bias_posterior.resize(pm.k - order, std::vector<double>(contexts));
    for (auto& row : tm.bias_posterior)
        for (double& v : row) v = 0.1 + 0.8 * rng.next_unit();
    return tm;
}

inline std::vector<int> random_binary_sequence(Rng& rng, int min_len = 3, int max_len = 30) {
    int n = min_len + static_cast<int>(rng.next_index(max_len - min_len + 1));
    std::vector<int> seq(n);
    for (int& v : seq) v = rng.next_unit() < 0.4 ? 1 : 0;
    return seq;
}

} // namespace mbd::testing

#endif
