#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support/oracles.hpp"
#include "vmfexp/errors.hpp"
#include "vmfexp/montecarlo.hpp"
#include "vmfexp/theory.hpp"

using namespace vmfexp;

namespace {

ExperimentSpec small_spec(int d, double kappa, double dot_va, std::uint64_t trials, std::uint64_t sets) {
    ExperimentSpec spec;
    spec.d = d;
    spec.kappa = kappa;
    spec.dot_va = dot_va;
    spec.n_grid = {100};
    spec.trials = trials;
    spec.resample_sets = sets;
    spec.seed = 12345;
    return spec;
}

bool same(const ProbabilityEstimate& a, const ProbabilityEstimate& b) {
    return a.p_hat == b.p_hat && a.half_width_95 == b.half_width_95 && a.trials_total == b.trials_total;
}

}  // namespace

TEST_CASE("anchor pairs have the requested inner product") {
    RandomSource rng(1);
    for (int d : {2, 3, 8, 64}) {
        for (int rep = 0; rep < 20; ++rep) {
            auto [v, a] = place_anchor_pair(d, 1.0, rng);
            auto [w, b] = place_anchor_pair(d, -1.0, rng);
            auto [x, c] = place_anchor_pair(d, 0.5, rng);
            for (int i = 0; i < d; ++i) {
                const auto k = static_cast<std::size_t>(i);
                CHECK(a[k] == doctest::Approx(v[k]).epsilon(1e-15));
                CHECK(b[k] == doctest::Approx(-w[k]).epsilon(1e-15));
            }
            CHECK(std::abs(dot(x.coords(), c.coords()) - 0.5) <= 1e-12);
        }
    }
    CHECK_THROWS_AS(place_anchor_pair(3, 1.01, rng), DomainError);
}

TEST_CASE("experiment validation") {
    auto spec = small_spec(3, 1.0, 0.5, 100, 10);
    CHECK_NOTHROW(spec.validate());
    auto bad = spec;
    bad.trials = 0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = spec;
    bad.resample_sets = 0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = spec;
    bad.dot_va = 1.5;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = spec;
    bad.d = 1;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = spec;
    bad.n_grid = {};
    CHECK_THROWS_AS(run_grid(bad), DomainError);
}

TEST_CASE("kappa 0 selects the anchor at rate 1/(n+1)") {
    for (int d : {2, 3, 8}) {
        for (std::uint64_t n : {10, 100}) {
            auto spec = small_spec(d, 0.0, 0.3, 100000, 500);
            spec.vmf_estimator = VmfEstimator::direct;
            const auto direct = estimate_vmf_prob(spec, n);
            CHECK(direct.covers(1.0 / static_cast<double>(n + 1)));
            spec.vmf_estimator = VmfEstimator::cell;
            const auto cell = estimate_vmf_prob(spec, n);
            CHECK(cell.p_hat == doctest::Approx(1.0 / static_cast<double>(n + 1)).epsilon(1e-9));

            for (auto route : {BoltzmannEstimator::radial, BoltzmannEstimator::materialized}) {
                spec.boltzmann_estimator = route;
                const auto boltz = estimate_boltzmann_prob(spec, n);
                CHECK(boltz.p_hat == doctest::Approx(1.0 / static_cast<double>(n + 1)).epsilon(1e-14));
                CHECK(boltz.half_width_95 == 0.0);
            }
        }
    }
}

TEST_CASE("Boltzmann with a single opponent matches quadrature") {
    for (int d : {2, 3, 8}) {
        const double truth = testsupport::boltzmann_single_opponent(d, 1.0, 0.5);
        auto spec = small_spec(d, 1.0, 0.5, 1, 200000);
        const auto radial = estimate_boltzmann_prob(spec, 1);
        CHECK(std::abs(radial.p_hat - truth) <= 1e-3);
        spec.boltzmann_estimator = BoltzmannEstimator::materialized;
        spec.resample_sets = 50000;
        const auto materialized = estimate_boltzmann_prob(spec, 1);
        CHECK(std::abs(materialized.p_hat - truth) <= 1e-3);
    }
}

TEST_CASE("Boltzmann routes agree") {
    for (int d : {2, 5}) {
        auto spec = small_spec(d, 2.0, 0.5, 1, 20000);
        const auto radial = estimate_boltzmann_prob(spec, 300);
        spec.boltzmann_estimator = BoltzmannEstimator::materialized;
        const auto materialized = estimate_boltzmann_prob(spec, 300);
        CHECK(radial.overlaps(materialized));
        CHECK(radial.trials_total == 20000);
    }
}

TEST_CASE("vMF estimators agree with each other and with quadrature") {
    for (int d : {2, 3, 4, 8}) {
        const std::uint64_t n = 100;
        const double truth = testsupport::vmf_exp_probability(static_cast<long>(n), d, 1.0, 0.5);
        auto spec = small_spec(d, 1.0, 0.5, 400000, 2000);
        spec.vmf_estimator = VmfEstimator::cell;
        const auto cell = estimate_vmf_prob(spec, n);
        spec.vmf_estimator = VmfEstimator::direct;
        const auto direct = estimate_vmf_prob(spec, n);
        MESSAGE("d " << d << " oracle " << truth << " cell " << cell.p_hat << " direct " << direct.p_hat);
        CHECK(cell.overlaps(direct));
        CHECK(std::abs(cell.p_hat - truth) <= 2.0 * cell.half_width_95);
        CHECK(std::abs(direct.p_hat - truth) <= 1.5 * direct.half_width_95);
    }
    for (int d : {4, 8, 16}) {
        const std::uint64_t n = 100000;
        const double truth = testsupport::vmf_exp_probability(static_cast<long>(n), d, 1.0, 0.5);
        auto spec = small_spec(d, 1.0, 0.5, 200000, 1);
        const auto cell = estimate_vmf_prob(spec, n);
        CHECK(std::abs(cell.p_hat - truth) <= 1.5 * cell.half_width_95);
    }
}

TEST_CASE("cell estimator matches the circle oracle") {
    const double theta0 = std::numbers::pi / 3;
    auto spec = small_spec(2, 1.0, std::cos(theta0), 1000000, 1);
    const auto cell = estimate_vmf_prob(spec, 10000);
    RandomSource rng(3);
    const auto oracle = exact_2d_vmf_prob(1.0, theta0, 10000, 20000, rng);
    CHECK(cell.overlaps(oracle));
}

TEST_CASE("results do not depend on the worker count") {
    auto spec = small_spec(3, 1.0, 0.5, 30000, 300);
    spec.n_grid = {50, 200};
    spec.workers = 1;
    for (auto est : {VmfEstimator::cell, VmfEstimator::direct}) {
        spec.vmf_estimator = est;
        spec.workers = 1;
        const auto one = run_grid(spec);
        spec.workers = 8;
        const auto eight = run_grid(spec);
        REQUIRE(one.size() == 2);
        REQUIRE(eight.size() == 2);
        for (std::size_t i = 0; i < one.size(); ++i) {
            CHECK(one[i].n == eight[i].n);
            CHECK(same(one[i].p_vmf, eight[i].p_vmf));
            CHECK(same(one[i].p_boltz, eight[i].p_boltz));
            CHECK(one[i].p0 == eight[i].p0);
            CHECK(one[i].p1 == eight[i].p1);
        }
    }
}

TEST_CASE("grid rows") {
    auto spec = small_spec(2, 1.0, 0.5, 1000, 10);
    auto rows = run_grid(spec);
    REQUIRE(rows.size() == 1);
    CHECK_FALSE(rows[0].p1.has_value());
    CHECK(rows[0].p0 == p0({100, 2, 1.0, 0.5}));
    spec.d = 3;
    rows = run_grid(spec);
    REQUIRE(rows[0].p1.has_value());
    CHECK(*rows[0].p1 == p1({100, 3, 1.0, 0.5}));
    for (const auto& r : rows) {
        CHECK(r.p_vmf.p_hat >= 0.0);
        CHECK(r.p_vmf.p_hat <= 1.0);
        CHECK(r.p_boltz.p_hat >= 0.0);
        CHECK(r.p_boltz.p_hat <= 1.0);
    }
}

TEST_CASE("interval width shrinks like one over root trials") {
    for (auto est : {VmfEstimator::cell, VmfEstimator::direct}) {
        double ratio_sum = 0.0;
        for (std::uint64_t seed = 0; seed < 4; ++seed) {
            auto spec = small_spec(3, 1.0, 0.5, 50000, 50000);
            spec.vmf_estimator = est;
            spec.seed = seed;
            const auto one = estimate_vmf_prob(spec, 30);
            spec.trials = 100000;
            spec.resample_sets = 100000;
            const auto two = estimate_vmf_prob(spec, 30);
            ratio_sum += one.half_width_95 / two.half_width_95;
        }
        CHECK(ratio_sum / 4 == doctest::Approx(std::sqrt(2.0)).epsilon(0.1));
    }
}
