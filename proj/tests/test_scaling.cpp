#include <cmath>
#include <sstream>

#include "doctest.h"
#include "hsmf/acceptance.hpp"
#include "hsmf/catalog.hpp"
#include "hsmf/counting.hpp"
#include "hsmf/scaling.hpp"
#include "support.hpp"

using namespace hsmf;

namespace {

std::vector<double> q_range(double lo, double hi, double step) {
    std::vector<double> out;
    const auto n = static_cast<int>(std::lround((hi - lo) / step));
    for (int i = 0; i <= n; ++i) out.push_back(lo + i * step);
    return out;
}

MomentTable synthetic(const std::vector<double>& exponents) {
    MomentTable t;
    t.q_grid = {0.0};
    for (std::size_t i = 0; i < exponents.size(); ++i) {
        const double log_r = -std::log(2.0) * static_cast<double>(i + 1);
        t.log_scales.push_back(log_r);
        t.log_values.push_back(-exponents[i] * log_r);
        t.flags.push_back(MomentFlag::Exact);
    }
    return t;
}

}  // namespace

TEST_SUITE("scaling") {

TEST_CASE("solve_beta_k examples") {
    const MoranMeasure uniform(catalog::uniform_dyadic());
    for (std::int64_t k : {1, 5, 64}) {
        for (double q : {-3.0, -0.5, 0.0, 1.0, 2.5}) CHECK(solve_beta_k(uniform, q, k) == doctest::Approx(1.0 - q).epsilon(1e-14));
    }
    const MoranMeasure periodic(catalog::periodic_moran());
    for (const auto& row : test::read_fixture("periodic_beta.csv")) {
        for (std::int64_t k : {2, 10, 1000}) {
            CHECK(solve_beta_k(periodic, row.at("q"), k) == doctest::Approx(row.at("beta")).epsilon(1e-13));
        }
    }
    CHECK_THROWS_AS(solve_beta_k(uniform, 1.0, 0), Error);
}

TEST_CASE("beta_k(1) = 0 and the residual bound on random specs") {
    Rng rng(2024);
    for (int s = 0; s < 1000; ++s) {
        const MoranMeasure m(acceptance::random_spec(rng));
        const auto k = static_cast<std::int64_t>(1 + rng.next() % static_cast<std::uint64_t>(m.depth_cap()));
        const double q = -4.0 + 8.0 * rng.uniform();
        const double beta = solve_beta_k(m, q, k);
        CHECK(std::abs(log_partition_moment(m, q, beta, k)) <= 1e-12 * static_cast<double>(k));
        CHECK(std::abs(solve_beta_k(m, 1.0, k)) <= 1e-12);
    }
}

TEST_CASE("closed form and root solver agree") {
    Rng rng(99);
    int compared = 0;
    for (int s = 0; s < 300; ++s) {
        const MoranMeasure m(acceptance::random_spec(rng));
        if (!m.all_constant_ratios()) continue;
        const auto k = static_cast<std::int64_t>(1 + rng.next() % 500);
        const double q = -3.0 + 6.0 * rng.uniform();
        const double a = solve_beta_k(m, q, k, BetaMethod::ClosedForm);
        const double b = solve_beta_k(m, q, k, BetaMethod::RootSolver);
        CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
        ++compared;
    }
    CHECK(compared > 20);
    const MoranMeasure varying(test::single_family({0.5, 0.5}, {0.3, 0.5}, GapPolicy::EqualGaps));
    CHECK_THROWS_AS(solve_beta_k(varying, 2.0, 3, BetaMethod::ClosedForm), Error);
}

TEST_CASE("beta_k is non-increasing and convex in q") {
    Rng rng(5);
    const auto qs = q_range(-3.0, 3.0, 0.25);
    for (int s = 0; s < 50; ++s) {
        const MoranMeasure m(acceptance::random_spec(rng));
        const auto k = static_cast<std::int64_t>(1 + rng.next() % 200);
        std::vector<double> b;
        for (double q : qs) b.push_back(solve_beta_k(m, q, k));
        for (std::size_t i = 1; i < b.size(); ++i) CHECK(b[i] <= b[i - 1] + 1e-10);
        for (std::size_t i = 1; i + 1 < b.size(); ++i) CHECK(b[i] <= 0.5 * (b[i - 1] + b[i + 1]) + 1e-10);
    }
}

TEST_CASE("tail window") {
    CHECK(tail_window(100).first == 10);
    CHECK(tail_window(100).last == 100);
    CHECK(tail_window(1).first == 1);
}

TEST_CASE("beta_sequence examples") {
    const MoranMeasure uniform(catalog::uniform_dyadic());
    const BetaSequence u = beta_sequence(uniform, 2.0, 64);
    CHECK(u.liminf_est == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(u.limsup_est == doctest::Approx(-1.0).epsilon(1e-14));

    const MoranMeasure block(catalog::block_moran());
    const BetaSequence b = beta_sequence(block, 0.5, block.depth_cap());
    CHECK(std::abs(b.liminf_est - 0.2250) <= 0.02);
    CHECK(std::abs(b.limsup_est - 0.25) <= 0.02);
    CHECK(b.liminf_est < b.limsup_est);

    const MoranMeasure sw(catalog::switching_binomial());
    const BetaSequence s = beta_sequence(sw, 0.5, sw.depth_cap());
    CHECK(std::abs(s.liminf_est - 0.4240) <= 0.02);
    CHECK(std::abs(s.limsup_est - 0.4928) <= 0.02);

    const MoranMeasure periodic(catalog::periodic_moran());
    const BetaSequence p = beta_sequence(periodic, -1.0, 1000);
    CHECK(p.stride == 2);
    CHECK(p.oscillation() <= 1e-12);
}

TEST_CASE("theta_delta examples") {
    for (double d : {0.0, 0.5, 1.0}) {
        const ThetaDelta td = theta_delta_from_moments(synthetic(std::vector<double>(16, d)), 0.0);
        CHECK(td.theta == doctest::Approx(d).epsilon(1e-12));
        CHECK(td.delta == doctest::Approx(d).epsilon(1e-12));
        CHECK(td.slope == doctest::Approx(d).epsilon(1e-9));
    }
    std::vector<double> alternating;
    for (int i = 0; i < 16; ++i) alternating.push_back(i % 2 == 0 ? 0.3 : 0.7);
    const ThetaDelta alt = theta_delta_from_moments(synthetic(alternating), 0.0);
    CHECK(alt.theta == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(alt.delta == doctest::Approx(0.7).epsilon(1e-12));

    CHECK_THROWS_AS(theta_delta_from_moments(synthetic(std::vector<double>(5, 1.0)), 0.0), Error);

    const MoranMeasure uniform(catalog::uniform_dyadic());
    const std::vector<double> qs{2.0};
    const auto logs = default_log_radii(uniform, 60);
    const ThetaDelta td = theta_delta_from_moments(partition_moment_table(uniform, qs, logs), 2.0);
    CHECK(std::abs(td.theta + 1.0) <= 0.01);
    CHECK(std::abs(td.delta + 1.0) <= 0.01);
}

TEST_CASE("separator_grid examples") {
    const auto qs = q_range(-3.0, 3.0, 0.5);
    const MoranMeasure uniform(catalog::uniform_dyadic());
    const SeparatorGrid u = separator_grid(uniform, qs, 64);
    for (std::size_t i = 0; i < qs.size(); ++i) {
        CHECK(u.b[i] == doctest::Approx(1.0 - qs[i]).epsilon(1e-12));
        CHECK(u.B[i] == doctest::Approx(1.0 - qs[i]).epsilon(1e-12));
        CHECK(u.Lambda[i] == doctest::Approx(1.0 - qs[i]).epsilon(1e-12));
    }
    const MoranMeasure periodic(catalog::periodic_moran());
    const SeparatorGrid p = separator_grid(periodic, qs, 1000);
    for (std::size_t i = 0; i < qs.size(); ++i) {
        const double want = 0.51699250014423126 * (1.0 - qs[i]);
        CHECK(std::abs(p.b[i] - want) <= 1e-6);
        CHECK(std::abs(p.B[i] - want) <= 1e-6);
        CHECK(std::abs(p.Lambda[i] - want) <= 1e-6);
        CHECK(p.diagnostics[i].converged);
    }
    const MoranMeasure block(catalog::block_moran());
    const std::vector<double> half{0.5};
    const SeparatorGrid b = separator_grid(block, half, block.depth_cap());
    CHECK(b.b[0] < b.B[0]);
    CHECK_FALSE(b.diagnostics[0].converged);
}

TEST_CASE("invariants hold on the example grids") {
    const auto qs = q_range(-4.0, 4.0, 0.25);
    const acceptance::Fixtures fx = acceptance::default_fixtures();
    for (const auto* spec : {&fx.uniform, &fx.binomial, &fx.middle_thirds, &fx.periodic, &fx.block, &fx.switching}) {
        const MoranMeasure m(*spec);
        const SeparatorGrid g = separator_grid(m, qs, std::min<std::int64_t>(m.depth_cap(), 1 << 16));
        const InvariantReport r = check_separator_invariants(g);
        for (const auto& f : r.failures) MESSAGE(f);
        CHECK(r.ok());
    }
}

TEST_CASE("invariant checker rejects broken grids") {
    SeparatorGrid g;
    g.q_grid = {0.0, 1.0, 2.0};
    g.b = {1.0, 0.0, -1.0};
    g.B = {1.0, 0.0, -1.0};
    g.Lambda = {1.0, 0.0, -1.0};
    CHECK(check_separator_invariants(g).ok());
    g.B = {1.0, 0.2, -1.0};  // not convex, Lambda < B
    CHECK_FALSE(check_separator_invariants(g).ok());
    g.B = g.b;
    g.Lambda = {1.0, 0.01, -1.0};  // nonzero at q = 1
    CHECK_FALSE(check_separator_invariants(g).ok());
    g.Lambda = {1.0, 0.0, 0.5};  // increasing
    CHECK_FALSE(check_separator_invariants(g).ok());
}

TEST_CASE("Theta and Delta track b and B on the example measures") {
    const auto qs = q_range(-3.0, 3.0, 0.5);
    const acceptance::Fixtures fx = acceptance::default_fixtures();
    for (const auto* spec : {&fx.periodic, &fx.block, &fx.switching}) {
        const MoranMeasure m(*spec);
        const SeparatorGrid g = separator_grid(m, qs, m.depth_cap());
        for (std::size_t i = 0; i < qs.size(); ++i) {
            CHECK(std::abs(g.Theta[i] - g.b[i]) <= 0.05);
            CHECK(std::abs(g.Delta[i] - g.B[i]) <= 0.05);
        }
    }
}

TEST_CASE("numeric_derivative examples") {
    SampledCurve line;
    SampledCurve square;
    for (double q : q_range(-3.0, 3.0, 1.0)) {
        line.x.push_back(q);
        line.y.push_back(1.0 - q);
        square.x.push_back(q);
        square.y.push_back(q * q);
    }
    for (double q : line.x) CHECK(numeric_derivative(line, q) == doctest::Approx(-1.0));
    CHECK(numeric_derivative(square, 0.0) == 0.0);
    CHECK(numeric_derivative(square, 3.0) == doctest::Approx(6.0));
    CHECK_THROWS_AS(numeric_derivative(line, 0.5), Error);

    // p = 0.25 binomial exponent: tau'(0) = -1.2075, tau'(1) = -0.8113.
    SampledCurve tau;
    for (int i = 0; i <= 4000; ++i) {
        const double q = i / 1000.0 - 1.0;
        tau.x.push_back(q);
        tau.y.push_back(std::log2(std::pow(0.25, q) + std::pow(0.75, q)));
    }
    for (const auto& row : test::read_fixture("binomial_tau.csv")) {
        if (row.at("p") != 0.25 || row.at("q") < -1.0) continue;
        CHECK(numeric_derivative(tau, row.at("q")) == doctest::Approx(row.at("dtau")).epsilon(1e-6));
    }
}

TEST_CASE("separator csv") {
    const MoranMeasure uniform(catalog::uniform_dyadic());
    const std::vector<double> qs{0.0, 1.0};
    std::ostringstream out;
    write_separator_csv(out, separator_grid(uniform, qs, 32));
    CHECK(out.str() == "q,b,B,Lambda,Theta,Delta,osc,converged\n0,1,1,1,1,1,0,true\n1,0,0,0,0,0,0,true\n");
}

}  // TEST_SUITE
