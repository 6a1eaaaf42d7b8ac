#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mbd/error.hpp"
#include "mbd/gmm.hpp"
#include "mbd/rng.hpp"

using namespace mbd;

namespace {

std::vector<double> bimodal_samples(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> samples;
    samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        samples.push_back(i % 2 == 0 ? rng.next_gaussian(0.2, 0.05)
                                     : rng.next_gaussian(0.8, 0.05));
    return samples;
}

} // namespace

TEST_CASE("single component fit is the sample mean and floored ML variance") {
    std::vector<double> samples{0.1, 0.2, 0.3, 0.6};
    Gmm gmm = fit_gmm(samples, 1, 5);
    REQUIRE(gmm.components.size() == 1);
    double mean = (0.1 + 0.2 + 0.3 + 0.6) / 4.0;
    double var = 0.0;
    for (double x : samples) var += (x - mean) * (x - mean);
    var /= 4.0;
    CHECK(gmm.components[0].mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(gmm.components[0].variance == doctest::Approx(var).epsilon(1e-9));
    CHECK(gmm.components[0].weight == doctest::Approx(1.0));
}

TEST_CASE("constant samples hit the variance floor") {
    std::vector<double> samples(100, 0.5);
    Gmm gmm = fit_gmm(samples, 1, 3);
    CHECK(gmm.components[0].mean == doctest::Approx(0.5));
    CHECK(gmm.components[0].variance == doctest::Approx(1e-4));
}

TEST_CASE("two-component fit recovers planted means") {
    Gmm gmm = fit_gmm(bimodal_samples(5000, 1234), 2, 77);
    REQUIRE(gmm.components.size() == 2);
    // components are sorted by mean
    CHECK(std::abs(gmm.components[0].mean - 0.2) < 0.02);
    CHECK(std::abs(gmm.components[1].mean - 0.8) < 0.02);
}

TEST_CASE("log-likelihood trace is non-decreasing and weights stay normalized") {
    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> samples;
        int n = 50 + static_cast<int>(rng.next_index(200));
        for (int i = 0; i < n; ++i) samples.push_back(rng.next_unit());
        Gmm gmm = fit_gmm(samples, 1 + static_cast<int>(rng.next_index(4)), trial);
        for (std::size_t i = 1; i < gmm.log_likelihood_trace.size(); ++i)
            CHECK(gmm.log_likelihood_trace[i] >= gmm.log_likelihood_trace[i - 1] - 1e-9);
        double total = 0.0;
        for (const GaussComponent& c : gmm.components) {
            total += c.weight;
            CHECK(c.variance >= 1e-4);
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("fit is bit-reproducible for a fixed seed") {
    std::vector<double> samples = bimodal_samples(400, 9);
    Gmm a = fit_gmm(samples, 3, 42);
    Gmm b = fit_gmm(samples, 3, 42);
    REQUIRE(a.components.size() == b.components.size());
    for (std::size_t l = 0; l < a.components.size(); ++l) {
        CHECK(a.components[l].mean == b.components[l].mean);
        CHECK(a.components[l].variance == b.components[l].variance);
        CHECK(a.components[l].weight == b.components[l].weight);
    }
    CHECK(a.log_likelihood_trace == b.log_likelihood_trace);
}

TEST_CASE("more components than distinct values still fits") {
    std::vector<double> samples{0.25, 0.25, 0.75, 0.75};
    Gmm gmm = fit_gmm(samples, 3, 11);
    CHECK(gmm.components.size() == 3);
    for (const GaussComponent& c : gmm.components) CHECK(c.variance >= 1e-4);
}

TEST_CASE("empty samples and bad counts are rejected") {
    CHECK_THROWS_AS(fit_gmm({}, 1, 0), ValidationError);
    CHECK_THROWS_AS(fit_gmm({0.5}, 0, 0), ValidationError);
}

TEST_CASE("assign picks the nearest mean under equal spread") {
    Gmm gmm;
    gmm.components = {{0.2, 0.01, 0.5}, {0.8, 0.01, 0.5}};
    CHECK(assign_component(gmm, 0.1) == 0);
    CHECK(assign_component(gmm, 0.9) == 1);
    // exactly equidistant: densities tie, lower index wins
    CHECK(assign_component(gmm, 0.5) == 0);
}

TEST_CASE("assign with one component is always zero") {
    Gmm gmm;
    gmm.components = {{0.4, 0.02, 1.0}};
    CHECK(assign_component(gmm, -3.0) == 0);
    CHECK(assign_component(gmm, 5.0) == 0);
}

TEST_CASE("component bias applies add-one smoothing") {
    Gmm gmm;
    gmm.components = {{0.2, 0.01, 0.5}, {0.8, 0.01, 0.5}};

    // three biased near 0.2; nothing near 0.8
    ComponentBiasTable t1 = component_bias(gmm, {{0.19, 1}, {0.21, 1}, {0.2, 1}});
    CHECK(t1.bias_posterior[0] == doctest::Approx(0.8)); // (3+1)/(3+2)
    CHECK(t1.bias_posterior[1] == doctest::Approx(0.5)); // (0+1)/(0+2)

    ComponentBiasTable t2 =
        component_bias(gmm, {{0.2, 1}, {0.19, 0}, {0.21, 0}, {0.18, 0}});
    CHECK(t2.bias_posterior[0] == doctest::Approx(2.0 / 6.0)); // (1+1)/(4+2)
}

TEST_CASE("smoothed posteriors stay strictly inside (0,1)") {
    Rng rng(5);
    std::vector<double> samples;
    for (int i = 0; i < 120; ++i) samples.push_back(rng.next_unit());
    Gmm gmm = fit_gmm(samples, 4, 13);
    std::vector<std::pair<double, int>> labeled;
    for (double x : samples) labeled.emplace_back(x, rng.next_unit() < 0.3 ? 1 : 0);
    ComponentBiasTable table = component_bias(gmm, labeled);
    for (double p : table.bias_posterior) {
        CHECK(p > 0.0);
        CHECK(p < 1.0);
    }
}

TEST_CASE("likelihood ratio arithmetic") {
    Gmm gmm;
    gmm.components = {{0.5, 0.01, 1.0}};
    ComponentBiasTable table;
    table.bias_prior = 0.5;

    table.bias_posterior = {0.8};
    CHECK(likelihood_ratio(table, gmm, 0.5, 1) == doctest::Approx(1.6));

    table.bias_posterior = {0.5};
    CHECK(likelihood_ratio(table, gmm, 0.5, 1) == doctest::Approx(1.0));
    CHECK(likelihood_ratio(table, gmm, 0.5, 0) == doctest::Approx(1.0));

    table.bias_posterior = {1.0 / 3.0};
    CHECK(likelihood_ratio(table, gmm, 0.5, 0) == doctest::Approx((2.0 / 3.0) / 0.5));
}
