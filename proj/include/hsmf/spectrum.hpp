#pragma once

// Legendre transforms, admissible exponent intervals, coarse level-set
// counts and tilted-sampling checks.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "hsmf/measure.hpp"
#include "hsmf/scaling.hpp"

namespace hsmf {

struct LegendreResult {
    std::vector<double> alpha;
    std::vector<double> value;        // min_i (alpha q_i + phi_i)
    std::vector<std::size_t> argmin;  // first minimizing grid index
    std::vector<char> boundary;       // minimizer only at a grid end
};

// Discrete transform phi*(alpha) = min over the grid of alpha q + phi(q),
// evaluated as plain `alpha * q + phi` so an independent re-evaluation with
// the same arithmetic matches bit for bit.  `boundary` is set when the first
// minimizer is an end node and no interior node ties it within
// 1e-12 (1 + |min|): the true infimum may then lie beyond the grid.
LegendreResult legendre_transform(std::span<const double> q_grid, std::span<const double> phi,
                                  std::span<const double> alpha_grid);

struct AlphaBounds {
    double alpha_min = 0.0;  // max over q > 0 of -b(q)/q
    double alpha_max = 0.0;  // min over q < 0 of -b(q)/q
    double beta_min = 0.0;   // same with B
    double beta_max = 0.0;
};

// Grid points with |q| <= 1e-12 are ignored; DegenerateGrid when either sign
// is missing.
AlphaBounds alpha_bounds(std::span<const double> q_grid, std::span<const double> b, std::span<const double> B);
AlphaBounds alpha_bounds(const SeparatorGrid& grid);

struct CoarseOptions {
    std::int64_t exact_generation_limit = 24;
    std::size_t sample_count = 4096;  // per (r, alpha) bin in sampled mode
    std::uint64_t seed = 0;
};

struct CoarseBin {
    double r = 0.0;      // 0 when the radius underflows; log_r is authoritative
    double log_r = 0.0;
    double alpha = 0.0;
    std::int64_t generation = 0;
    bool sampled = false;
    bool empty = true;
    double count = 0.0;      // (estimated) number of cells; exact integer when not sampled
    double log_count = 0.0;  // natural log of count, kept for counts beyond double range
    double f_hat = 0.0;      // log count / (-log r); meaningless when empty
    double f_hat_stderr = 0.0;
};

struct CoarseSpectrum {
    double epsilon = 0.0;
    std::vector<double> log_r_list;
    std::vector<double> alpha_grid;
    std::vector<CoarseBin> bins;  // r outer, alpha inner

    const CoarseBin& at(std::size_t ir, std::size_t ia) const { return bins[ir * alpha_grid.size() + ia]; }
};

// For each r, counts matched-generation cells with log mass / log r in
// [alpha - eps, alpha + eps].  Up to exact_generation_limit the count is
// exact (cells are grouped by their per-family child-index composition);
// deeper generations use importance sampling of compositions from a tilt
// chosen so its mean exponent is alpha, with a reported standard error.
CoarseSpectrum coarse_spectrum(const MoranMeasure& measure, std::span<const double> r_list, double epsilon,
                               std::span<const double> alpha_grid, const CoarseOptions& options = {});
// Same with radii given as natural logs, for scales below the double range.
CoarseSpectrum coarse_spectrum_log(const MoranMeasure& measure, std::span<const double> log_r_list, double epsilon,
                                   std::span<const double> alpha_grid, const CoarseOptions& options = {});

// Mean of log p / log c under the per-generation (q, t) tilt, generations
// 1..depth: the exponent tilted samples concentrate on.
double tilted_exponent(const MoranMeasure& measure, double q, double t, std::int64_t depth);

struct TiltedCheck {
    double q = 0.0;
    double t = 0.0;
    std::int64_t depth = 0;
    std::size_t sample_count = 0;
    double alpha_hat_pred = 0.0;  // -d/dq beta_depth(q), central difference
    double alpha_emp_mean = 0.0;  // mean of log mass / log length over tilted paths
    double alpha_emp_sd = 0.0;
    double legendre_value = 0.0;  // q alpha_hat_pred + t
};

TiltedCheck tilted_dimension_check(const MoranMeasure& measure, double q, double t, std::int64_t depth,
                                   std::size_t sample_count, std::uint64_t seed);

struct SpectrumResult {
    std::vector<double> alpha_grid;
    LegendreResult b_star;
    LegendreResult B_star;
    AlphaBounds bounds;
    CoarseSpectrum coarse;
    std::vector<TiltedCheck> tilted;
};

// CSV `alpha,b_star,B_star,boundary_flag`; boundary_flag is 1 when either
// transform is boundary-flagged.
void write_legendre_csv(std::ostream& out, const SpectrumResult& result);

// CSV `r,alpha,f_hat,count,f_hat_stderr`; empty bins carry the sentinel
// "empty" in f_hat and 0 in count.  Radii and counts outside the double
// range are written as exp(<natural log>).
void write_coarse_csv(std::ostream& out, const CoarseSpectrum& coarse);

}  // namespace hsmf
