#pragma once

// Closed-form reference curves for the example measures and an exact
// small-depth optimizer for the ball moment problems.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hsmf/measure.hpp"

namespace hsmf::oracles {

// beta(q) of Lebesgue measure: 1 - q.
double uniform_beta(double q);

// log2(p^q + (1 - p)^q): the exponent of the binomial cascade.
double binomial_tau(double p, double q);

// Alternating two-family Moran measure with constant ratios r1, r2:
//   beta(q) = (log sum p1^q + log sum p2^q) / (-log r1 - log r2).
// Needs r_i n_i < 1 (room for gaps) for each family of arity n_i; otherwise
// ParameterOutOfRange.
double periodic_moran_beta(std::span<const double> p1, double r1, std::span<const double> p2, double r2, double q);

enum class BlockRegime { Interior, Exterior, Boundary };  // 0 < q < 1, q < 0 or q > 1, q in {0, 1}

struct BlockBounds {
    double first = 0.0;   // log sum p1^q / (-log r1)
    double second = 0.0;  // log sum p2^q / (-log r2)
    double liminf = 0.0;
    double limsup = 0.0;
    int liminf_family = 0;  // 1 or 2; 0 when both branches agree
    BlockRegime regime = BlockRegime::Boundary;
};

// Lower and upper limits of beta_k(q) for block-alternating schedules whose
// block lengths grow superexponentially: the min and max of the two
// single-family exponents.
BlockBounds block_moran_bounds(std::span<const double> p1, double r1, std::span<const double> p2, double r2,
                               double q);

struct SwitchingTau {
    double tau = 0.0;      // binomial_tau(p, q)
    double tau_hat = 0.0;  // binomial_tau(p_hat, q)
};

// Needs 0 < p < p_hat <= 1/2 (ParameterOutOfRange).
SwitchingTau switching_binomial_tau(double p, double p_hat, double q);

struct ExponentInterval {
    double lo = 0.0;
    double hi = 0.0;
};

// (-log2(1 - p_hat), -log2(p_hat)).
ExponentInterval switching_alpha_interval(double p_hat);

struct OracleCurve {
    std::string name;
    std::string source;
    std::vector<double> q_grid;
    std::vector<double> values;
};

OracleCurve make_curve(std::string name, std::string source, std::span<const double> q_grid,
                       const std::function<double(double)>& fn);

struct BruteForceMoments {
    double packing = 0.0;   // max of sum m^q over r-separated center sets
    double covering = 0.0;  // min of sum m^q over covering center sets
    std::size_t packing_centers = 0;
    std::size_t covering_centers = 0;
    std::int64_t generation = 0;
    std::size_t candidates = 0;
};

inline constexpr std::int64_t kBruteForceDepthLimit = 12;

// Exact optima within the candidate class used by the greedy estimators
// (endpoints of the matched-generation cells, ball masses at
// max(depth, matched generation)).  Packing is weighted interval scheduling;
// covering is a shortest path whose admissible predecessors form a sliding
// window.  TooDeep when depth or the matched generation exceeds 12.
BruteForceMoments brute_force_ball_moments(const MoranMeasure& measure, double q, double r, std::int64_t depth);

}  // namespace hsmf::oracles
