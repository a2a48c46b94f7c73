#pragma once

// Scaling exponents from moment statistics.
//
// beta_k(q) is the root in beta of log S_k(q, beta) = 0.  Lower and upper
// limits of a sequence are estimated from a tail window of sampled indices
// [ceil(sqrt(k_max)), k_max]: the window is long on a log scale, so for block
// schedules whose block lengths grow geometrically it always contains both a
// block end of each family.  Samples are taken on multiples of the schedule's
// natural stride (its period for periodic schedules).

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hsmf/counting.hpp"
#include "hsmf/measure.hpp"

namespace hsmf {

enum class BetaMethod { Auto, ClosedForm, RootSolver };

// log S_k(q, beta) as a function of beta for fixed per-family generation
// counts; strictly decreasing.
struct BetaEquation {
    std::vector<double> counts;                 // generations per family
    std::vector<std::vector<double>> log_probs;  // q * log p, per family
    std::vector<std::vector<double>> log_ratios;

    double value(double beta) const;
    double value_and_slope(double beta, double& slope) const;
};

// Root of log S_k(q, beta) = 0.  ClosedForm requires constant ratios within
// every family in use (throws InvalidArgument otherwise).  The root solver
// brackets on [-64, 64], widening geometrically, then refines by safeguarded
// Newton.  Throws NoBracket if no sign change is found, InvalidArgument for
// k < 1.
double solve_beta_k(const MoranMeasure& measure, double q, std::int64_t k, BetaMethod method = BetaMethod::Auto);

struct TailWindow {
    std::int64_t first = 1;
    std::int64_t last = 1;
};

TailWindow tail_window(std::int64_t k_max);

struct BetaSequence {
    double q = 0.0;
    std::int64_t stride = 1;
    std::vector<std::int64_t> k_samples;
    std::vector<double> beta_values;
    TailWindow window;
    double liminf_est = 0.0;
    double limsup_est = 0.0;

    double oscillation() const { return limsup_est - liminf_est; }
};

// beta_k(q) for k = stride, 2 stride, ..., <= k_max.  stride = 0 selects the
// schedule's natural stride.  Family counts are advanced incrementally so the
// whole sequence costs O(k_max) root solves (O(k_max) arithmetic when ratios
// are constant per family).
BetaSequence beta_sequence(const MoranMeasure& measure, double q, std::int64_t k_max, std::int64_t stride = 0);

struct ThetaDelta {
    double theta = 0.0;
    double delta = 0.0;
    double slope = 0.0;  // least-squares slope of log value against -log r over the window
    std::size_t first_row = 0;
    std::size_t rows = 0;
};

// liminf / limsup of log value / (-log r) over the fine end of the table:
// rows whose log(-log r) lies in the upper half of the table's range (at
// least two rows).  Needs >= 8 scales below 1 spanning >= 4 octaves
// (InsufficientScales).  q must be one of the table's grid values.
ThetaDelta theta_delta_from_moments(const MomentTable& table, double q);

// log r at geometrically spaced generations 1..k_max, matched to the largest
// cell length so every radius is attained exactly.
std::vector<double> default_log_radii(const MoranMeasure& measure, std::int64_t k_max, std::size_t samples = 96);

struct SeparatorDiagnostics {
    TailWindow window;
    std::int64_t stride = 1;
    double oscillation = 0.0;
    bool converged = false;  // oscillation <= kConvergenceTolerance
    double theta_slope = 0.0;
};

inline constexpr double kConvergenceTolerance = 1e-6;

struct SeparatorGrid {
    std::vector<double> q_grid;
    std::vector<double> b;
    std::vector<double> B;
    std::vector<double> Lambda;
    std::vector<double> Theta;
    std::vector<double> Delta;
    std::vector<SeparatorDiagnostics> diagnostics;
};

// b = liminf beta_k, B = Lambda = limsup beta_k; Theta and Delta come
// independently from a partition-moment table over log_radii (default grid
// when empty).
SeparatorGrid separator_grid(const MoranMeasure& measure, std::span<const double> q_grid, std::int64_t k_max,
                             std::span<const double> log_radii = {});

struct InvariantReport {
    std::vector<std::string> failures;

    bool ok() const noexcept { return failures.empty(); }
};

// Non-increasing b, B, Lambda; discrete convexity of B and Lambda (on any
// grid spacing); b <= B <= Lambda; b(1) = Lambda(1) = 0 when 1 is on the grid.
InvariantReport check_separator_invariants(const SeparatorGrid& grid, double slack = 1e-8,
                                           double zero_slack = 1e-9);

// Same checks for a single curve (monotone, convex, zero at q = 1).
InvariantReport check_curve_invariants(std::span<const double> q_grid, std::span<const double> values,
                                       const std::string& name, double slack = 1e-8, double zero_slack = 1e-9);

// CSV `q,b,B,Lambda,Theta,Delta,osc,converged`.
void write_separator_csv(std::ostream& out, const SeparatorGrid& grid);

struct SampledCurve {
    std::vector<double> x;
    std::vector<double> y;
};

// Central difference (y[i+1] - y[i-1]) / (x[i+1] - x[i-1]) at the grid node
// x[i] = q; second-order one-sided three-point formulas at the ends (plain
// two-point difference on a two-node grid).  Throws InvalidArgument when q is
// not a grid node.
double numeric_derivative(const SampledCurve& curve, double q);

}  // namespace hsmf
