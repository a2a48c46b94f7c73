#include "hsmf/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "hsmf/counting.hpp"

namespace hsmf::oracles {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_power_sum(std::span<const double> p, double q) {
    double s = 0.0;
    for (double v : p) s += std::pow(v, q);
    return std::log(s);
}

void check_family(std::span<const double> p, double r, const char* name) {
    double sum = 0.0;
    for (double v : p) {
        if (!(v > 0.0)) throw Error(ErrorCode::ParameterOutOfRange, std::string(name) + " has a non-positive weight");
        sum += v;
    }
    if (p.size() < 2 || std::abs(sum - 1.0) > 1e-12) {
        throw Error(ErrorCode::ParameterOutOfRange, std::string(name) + " is not a probability vector");
    }
    if (!(r > 0.0) || !(r * static_cast<double>(p.size()) < 1.0)) {
        throw Error(ErrorCode::ParameterOutOfRange, std::string(name) + " ratio leaves no gap");
    }
}

}  // namespace

double uniform_beta(double q) { return 1.0 - q; }

double binomial_tau(double p, double q) { return std::log2(std::pow(p, q) + std::pow(1.0 - p, q)); }

double periodic_moran_beta(std::span<const double> p1, double r1, std::span<const double> p2, double r2, double q) {
    check_family(p1, r1, "first family");
    check_family(p2, r2, "second family");
    if (q == 1.0) return 0.0;
    return (log_power_sum(p1, q) + log_power_sum(p2, q)) / (-std::log(r1) - std::log(r2));
}

BlockBounds block_moran_bounds(std::span<const double> p1, double r1, std::span<const double> p2, double r2,
                               double q) {
    check_family(p1, r1, "first family");
    check_family(p2, r2, "second family");
    BlockBounds out;
    out.first = q == 1.0 ? 0.0 : log_power_sum(p1, q) / -std::log(r1);
    out.second = q == 1.0 ? 0.0 : log_power_sum(p2, q) / -std::log(r2);
    out.liminf = std::min(out.first, out.second);
    out.limsup = std::max(out.first, out.second);
    out.liminf_family = out.first < out.second ? 1 : (out.second < out.first ? 2 : 0);
    if (q == 0.0 || q == 1.0) {
        out.regime = BlockRegime::Boundary;
    } else if (q > 0.0 && q < 1.0) {
        out.regime = BlockRegime::Interior;
    } else {
        out.regime = BlockRegime::Exterior;
    }
    return out;
}

SwitchingTau switching_binomial_tau(double p, double p_hat, double q) {
    if (!(p > 0.0 && p < p_hat && p_hat <= 0.5)) {
        throw Error(ErrorCode::ParameterOutOfRange, "need 0 < p < p_hat <= 1/2");
    }
    if (q == 1.0) return {0.0, 0.0};
    return {binomial_tau(p, q), binomial_tau(p_hat, q)};
}

ExponentInterval switching_alpha_interval(double p_hat) {
    if (!(p_hat > 0.0 && p_hat <= 0.5)) throw Error(ErrorCode::ParameterOutOfRange, "need 0 < p_hat <= 1/2");
    return {-std::log2(1.0 - p_hat), -std::log2(p_hat)};
}

OracleCurve make_curve(std::string name, std::string source, std::span<const double> q_grid,
                       const std::function<double(double)>& fn) {
    OracleCurve c{std::move(name), std::move(source), {q_grid.begin(), q_grid.end()}, {}};
    for (double q : q_grid) c.values.push_back(fn(q));
    return c;
}

BruteForceMoments brute_force_ball_moments(const MoranMeasure& measure, double q, double r, std::int64_t depth) {
    if (depth > kBruteForceDepthLimit) throw Error(ErrorCode::TooDeep, "brute force is limited to depth 12");
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
    const std::int64_t k = measure.matched_generation(r);
    if (k > kBruteForceDepthLimit) throw Error(ErrorCode::TooDeep, "matched generation exceeds 12");

    const SupportModel support(measure, k);
    const auto x = support.candidates();
    const auto masses = center_masses(measure, support, r, std::max(depth, k));
    const std::size_t n = x.size();
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = std::pow(masses[i], q);
    constexpr double tol = kGeometryTolerance;

    BruteForceMoments out;
    out.generation = k;
    out.candidates = n;

    // Packing: best[i] = w_i + max(0, max_{x_j <= x_i - r + tol} best[j]).
    {
        std::vector<double> best(n), prefix(n);
        std::vector<std::size_t> size(n), prefix_arg(n);
        std::size_t j = 0;
        for (std::size_t i = 0; i < n; ++i) {
            while (j < i && x[j] <= x[i] - r + tol) ++j;
            best[i] = w[i];
            size[i] = 1;
            if (j > 0 && prefix[j - 1] > 0.0) {
                best[i] += prefix[j - 1];
                size[i] += size[prefix_arg[j - 1]];
            }
            if (i == 0 || best[i] > prefix[i - 1]) {
                prefix[i] = best[i];
                prefix_arg[i] = i;
            } else {
                prefix[i] = prefix[i - 1];
                prefix_arg[i] = prefix_arg[i - 1];
            }
        }
        out.packing = prefix[n - 1];
        out.packing_centers = size[prefix_arg[n - 1]];
    }

    // Covering: valid predecessors of i are j < i with
    // next_support_after(x_j + r + tol) >= x_i - r - tol, a suffix of [0, i).
    {
        std::vector<double> reach(n);
        for (std::size_t i = 0; i < n; ++i) reach[i] = support.next_support_after(x[i] + r + tol);
        std::vector<double> cost(n, kInf);
        std::vector<std::size_t> size(n, 0);
        std::deque<std::size_t> window;  // indices with increasing cost
        std::size_t lo = 0;
        std::size_t pushed = 0;
        const double start = support.first_point();
        double best = kInf;
        std::size_t best_size = 0;
        for (std::size_t i = 0; i < n; ++i) {
            while (pushed < i) {
                while (!window.empty() && cost[window.back()] >= cost[pushed]) window.pop_back();
                window.push_back(pushed++);
            }
            while (lo < i && reach[lo] < x[i] - r - tol) ++lo;
            while (!window.empty() && window.front() < lo) window.pop_front();
            if (x[i] - r - tol <= start) {
                cost[i] = w[i];
                size[i] = 1;
            }
            if (!window.empty() && std::isfinite(cost[window.front()]) && cost[window.front()] + w[i] < cost[i]) {
                cost[i] = cost[window.front()] + w[i];
                size[i] = size[window.front()] + 1;
            }
            if (std::isinf(reach[i]) && cost[i] < best) {
                best = cost[i];
                best_size = size[i];
            }
        }
        out.covering = best;
        out.covering_centers = best_size;
    }
    return out;
}

}  // namespace hsmf::oracles
