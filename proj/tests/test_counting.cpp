#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "hsmf/catalog.hpp"
#include "hsmf/counting.hpp"
#include "support.hpp"

using namespace hsmf;

TEST_SUITE("counting") {

TEST_CASE("covering_count examples") {
    const MoranMeasure uniform(catalog::uniform_dyadic());
    CHECK(covering_count(uniform, 0.125) == 4);
    CHECK(covering_count(uniform, 1.0) == 1);
    CHECK(covering_count(uniform, 0.3) == 2);
    const MoranMeasure thirds(catalog::middle_thirds());
    CHECK(covering_count(thirds, 1.0 / 18.0) == 8);
    CHECK_THROWS_AS(covering_count(uniform, 1e-300), Error);
}

TEST_CASE("packing_count examples") {
    const MoranMeasure uniform(catalog::uniform_dyadic());
    CHECK(packing_count(uniform, 0.25) == 5);
    CHECK(packing_count(uniform, 2.0) == 1);
    const MoranMeasure thirds(catalog::middle_thirds());
    CHECK(packing_count(thirds, 1.0 / 27.0) == 16);
}

TEST_CASE("packing and covering are consistent on [0, 1]") {
    const MoranMeasure m(catalog::binomial(0.3));
    for (int j = 2; j <= 12; ++j) {
        const double r = std::ldexp(1.0, -j);
        CHECK(packing_count(m, r) >= covering_count(m, 2.0 * r) - 1);
    }
}

TEST_CASE("moments reduce to counts at q = 0") {
    for (const auto& spec : {catalog::uniform_dyadic(), catalog::binomial(0.25), catalog::middle_thirds()}) {
        const MoranMeasure m(spec);
        for (double r : {0.5, 0.2, 1.0 / 27.0, 0.01}) {
            CHECK(covering_moment(m, 0.0, r, 12).value == static_cast<double>(covering_count(m, r)));
            CHECK(packing_moment(m, 0.0, r, 12).value == static_cast<double>(packing_count(m, r)));
        }
    }
}

TEST_CASE("moment examples on the uniform measure") {
    const MoranMeasure m(catalog::uniform_dyadic());
    for (int k = 2; k <= 8; ++k) {
        const double r = std::ldexp(1.0, -k);
        const double want = std::ldexp(1.0, -k);
        const double cov = covering_moment(m, 2.0, r, k + 6).value;
        const double pack = packing_moment(m, 2.0, r, k + 6).value;
        CHECK(cov >= want / 4.0);
        CHECK(cov <= want * 4.0);
        CHECK(pack >= want / 4.0);
        CHECK(pack <= want * 4.0);
        CHECK(packing_moment(m, 1.0, r, k + 6).value <= 3.0);
    }
    const double half = covering_moment(m, 1.0, 0.5, 8).value;
    CHECK(half >= 1.0);
    CHECK(half <= static_cast<double>(covering_count(m, 0.5)));
    CHECK(covering_moment(m, -1.0, 0.25, 8).flag == MomentFlag::Heuristic);
    CHECK(covering_moment(m, 1.0, 0.25, 8).flag == MomentFlag::Greedy);
}

TEST_CASE("moments are non-increasing in q") {
    for (const auto& spec : {catalog::binomial(0.25), catalog::middle_thirds(), catalog::periodic_moran()}) {
        const MoranMeasure m(spec);
        for (double r : {0.1, 0.01}) {
            double last_cov = std::numeric_limits<double>::infinity();
            double last_pack = last_cov;
            for (double q = -2.0; q <= 3.0; q += 0.5) {
                const double cov = covering_moment(m, q, r, 14).value;
                const double pack = packing_moment(m, q, r, 14).value;
                CHECK(cov <= last_cov * (1.0 + 1e-12));
                CHECK(pack <= last_pack * (1.0 + 1e-12));
                last_cov = cov;
                last_pack = pack;
            }
        }
    }
}

TEST_CASE("partition_moment examples") {
    const MoranMeasure uniform(catalog::uniform_dyadic());
    CHECK(partition_moment(uniform, 2.0, 0.0, 3) == doctest::Approx(0.125).epsilon(1e-14));
    const MoranMeasure periodic(catalog::periodic_moran());
    CHECK(partition_moment(periodic, 0.0, 0.0, 2) == doctest::Approx(6.0).epsilon(1e-14));
    for (const auto& spec : {catalog::binomial(0.25), catalog::middle_thirds(), catalog::periodic_moran(),
                             catalog::block_moran(), catalog::switching_binomial()}) {
        const MoranMeasure m(spec);
        for (std::int64_t k : {1, 7, 40, 5000}) {
            CHECK(log_partition_moment(m, 1.0, 0.0, std::min(k, m.depth_cap())) == 0.0);
        }
    }
}

TEST_CASE("partition moment is log-convex in (q, t)") {
    const MoranMeasure m(catalog::block_moran());
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const double p = -3.0 + 6.0 * rng.uniform();
        const double q = -3.0 + 6.0 * rng.uniform();
        const double t = -2.0 + 4.0 * rng.uniform();
        const double s = -2.0 + 4.0 * rng.uniform();
        const double a = rng.uniform();
        const auto k = static_cast<std::int64_t>(1 + rng.next() % 300);
        const double mid = log_partition_moment(m, a * p + (1 - a) * q, a * t + (1 - a) * s, k);
        const double ends = a * log_partition_moment(m, p, t, k) + (1 - a) * log_partition_moment(m, q, s, k);
        CHECK(mid <= ends + 1e-9 * (1.0 + std::abs(ends)));
    }
}

TEST_CASE("partition moment matches cell enumeration") {
    const MoranMeasure m(catalog::periodic_moran());
    for (std::int64_t k = 1; k <= 6; ++k) {
        for (double q : {-1.5, 0.0, 0.7, 2.0}) {
            const double t = 0.3;
            double s = 0.0;
            for (const Cell& c : enumerate_cells(m, k)) s += std::pow(c.mass, q) * std::pow(c.length, t);
            CHECK(partition_moment(m, q, t, k) == doctest::Approx(s).epsilon(1e-12));
        }
    }
}

TEST_CASE("auxiliary statistics") {
    const MoranMeasure uniform(catalog::uniform_dyadic());
    for (int k = 2; k <= 6; ++k) {
        const double r = std::ldexp(1.0, -k);
        const auto zero = auxiliary_statistics(uniform, 0.0, r, 256, 1);
        CHECK(zero.renyi_integral == 1.0);
        CHECK(zero.renyi_integral_stderr == 0.0);
        CHECK(zero.minkowski_volume == doctest::Approx((1.0 + 2.0 * r) / r).epsilon(1e-9));
        const auto one = auxiliary_statistics(uniform, 1.0, r, 256, 1);
        CHECK(one.generation == k);
        CHECK(one.renyi_entropy == doctest::Approx(k * std::log(2.0)).epsilon(1e-12));
    }
    const MoranMeasure binomial(catalog::binomial(0.25));
    const auto a = auxiliary_statistics(binomial, 2.0, 0.01, 512, 5);
    const auto b = auxiliary_statistics(binomial, 2.0, 0.01, 512, 5);
    CHECK(a.renyi_integral == b.renyi_integral);
    CHECK(a.renyi_integral > 0.0);
    CHECK(a.renyi_integral_stderr > 0.0);
}

TEST_CASE("doubling ratio") {
    const MoranMeasure uniform(catalog::uniform_dyadic());
    CHECK(doubling_ratio_at(uniform, 0.5, 2.0, 0.25, 10) == doctest::Approx(2.0));
    const std::vector<double> radii{0.25, 0.1, 0.01};
    CHECK(doubling_ratio(uniform, 2.0, radii, 256, 0) >= 2.0 - 1e-12);
    CHECK(doubling_ratio(uniform, 1.0001, radii, 256, 0) >= 1.0);
    CHECK_THROWS_AS(doubling_ratio_at(uniform, 0.5, 1.0, 0.25, 10), Error);

    // Exhaustive dyadic centers x = i / 4096 at depth 12.  Reference maxima
    // from the exact binomial distribution function: 4 at r in {1/4, 1/8},
    // 53.749 once r = 0.01 is included (the ratio grows like 3^k near 1/2).
    const MoranMeasure binomial(catalog::binomial(0.25));
    auto scan = [&](const std::vector<double>& rs) {
        double worst = 0.0;
        for (int i = 0; i <= 4096; i += 16) {
            for (double r : rs) worst = std::max(worst, doubling_ratio_at(binomial, i / 4096.0, 2.0, r, 12));
        }
        return worst;
    };
    CHECK(scan({0.25, 0.125}) == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(scan(radii) == doctest::Approx(53.749).epsilon(0.01));
    CHECK(doubling_ratio(binomial, 2.0, std::vector<double>{0.25, 0.125}, 1024, 0) < 20.0);
}

TEST_CASE("moment tables") {
    const MoranMeasure m(catalog::middle_thirds());
    const std::vector<double> qs{-1.0, 0.0, 1.0, 2.0};
    const std::vector<double> radii{0.3, 0.1, 0.03, 0.01};
    const MomentTable cov = ball_moment_table(m, MomentKind::CoveringMoment, qs, radii);
    const MomentTable cnt = ball_moment_table(m, MomentKind::CoveringCount, qs, radii);
    for (std::size_t ir = 0; ir < radii.size(); ++ir) CHECK(cov.log_value(1, ir) == cnt.log_value(1, ir));
    CHECK_THROWS_AS(ball_moment_table(m, MomentKind::PackingMoment, qs, std::vector<double>{0.1, 0.3}), Error);

    std::vector<double> logs;
    for (double r : radii) logs.push_back(std::log(r));
    const MomentTable part = partition_moment_table(m, qs, logs);
    for (std::size_t ir = 0; ir < radii.size(); ++ir) CHECK(part.log_value(2, ir) == 0.0);

    std::ostringstream out;
    write_moment_csv(out, cnt);
    const std::string text = out.str();
    CHECK(text.rfind("kind,q,r,value,flag\n", 0) == 0);
    CHECK(text.find("covering_count,0,0.29999999999999999,2,greedy") != std::string::npos);
}

}  // TEST_SUITE
