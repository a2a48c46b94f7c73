#pragma once

// Fixed-radius covering/packing statistics of a Moran measure.
//
// Radius r is tied to a generation by MoranMeasure::matched_generation (the
// first generation whose cells are all no longer than r).  supp(mu) is
// approximated by the union of the matched-generation cells; admissible ball
// centers are the endpoints of those cells, which always belong to supp(mu)
// under both gap policies.  Greedy estimators are deterministic and run over
// that center class:
//
//   covering   leftmost uncovered support point a, center = the largest
//              candidate <= a + r.  Optimal count within the class, hence
//              within a factor 2 of N_r for real centers.
//   packing    leftmost-first r-separated subset.  Optimal count within the
//              class; a lower bound on M_r.
//
// Moment sums reuse those center sets.  The exact class optimum of the moment
// problems is computed by oracles::brute_force_ball_moments.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hsmf/measure.hpp"

namespace hsmf {

enum class MomentKind { CoveringMoment, PackingMoment, PartitionMoment, CoveringCount, PackingCount };

std::string_view to_string(MomentKind kind);

enum class MomentFlag : std::uint8_t { Exact, Greedy, Heuristic };

std::string_view to_string(MomentFlag flag);

// Sampled (q, r) statistics.  Radii and values are kept as natural logs so
// deep generations neither underflow nor overflow.
struct MomentTable {
    MomentKind kind = MomentKind::PartitionMoment;
    std::vector<double> q_grid;
    std::vector<double> log_scales;  // strictly decreasing radii
    std::vector<double> log_values;  // row-major, q outer, r inner
    std::vector<MomentFlag> flags;

    std::size_t index(std::size_t iq, std::size_t ir) const { return iq * log_scales.size() + ir; }
    double log_value(std::size_t iq, std::size_t ir) const { return log_values[index(iq, ir)]; }
};

// Support approximation at one generation.
class SupportModel {
public:
    SupportModel(const MoranMeasure& measure, std::int64_t generation,
                 std::int64_t max_cells = std::int64_t{1} << 22);

    std::int64_t generation() const noexcept { return generation_; }
    std::span<const Cell> cells() const noexcept { return cells_; }
    // Sorted, de-duplicated cell endpoints.
    std::span<const double> candidates() const noexcept { return candidates_; }

    double first_point() const noexcept { return merged_.front().first; }

    // Infimum of the support strictly to the right of y: y itself when y lies
    // inside a support interval, the next interval's left end otherwise, and
    // +infinity when nothing lies beyond y.
    double next_support_after(double y) const;

private:
    std::int64_t generation_;
    std::vector<Cell> cells_;
    std::vector<double> candidates_;
    std::vector<std::pair<double, double>> merged_;
};

// Absolute slack used by every coverage / separation test.
inline constexpr double kGeometryTolerance = 1e-12;

// Greedy center sets; returned as indices into support.candidates().
std::vector<std::size_t> greedy_cover(const SupportModel& support, double r);
std::vector<std::size_t> greedy_packing(const SupportModel& support, double r);
// r-separated subset chosen in descending weight order (ties to the left).
std::vector<std::size_t> greedy_packing_by_weight(const SupportModel& support, std::span<const double> weights,
                                                  double r);

// mu(B(c, r)) for every candidate center, evaluated at the given depth.
std::vector<double> center_masses(const MoranMeasure& measure, const SupportModel& support, double r,
                                  std::int64_t depth);

std::int64_t covering_count(const MoranMeasure& measure, double r);
std::int64_t packing_count(const MoranMeasure& measure, double r);

struct MomentValue {
    double value = 0.0;
    double log_value = 0.0;
    MomentFlag flag = MomentFlag::Greedy;
    std::size_t center_count = 0;
};

// Sum of mu(B(x_i, r))^q over the greedy cover.  Ball masses are evaluated at
// max(depth, matched generation).  Flagged Heuristic for q < 0.
MomentValue covering_moment(const MoranMeasure& measure, double q, double r, std::int64_t depth);

// Best of three greedy r-separated center sets (leftmost-first, heaviest-
// first, lightest-first) evaluated at q.  The value is non-increasing in q and
// equals packing_count at q = 0.
MomentValue packing_moment(const MoranMeasure& measure, double q, double r, std::int64_t depth);

// log sum_j p_j^q c_j^t for one family (exactly 0 at q = 1, t = 0).
double family_log_partition(const MoranMeasure& measure, std::size_t family, double q, double t);

// log S_k(q, t) = log sum_{|sigma| = k} p_sigma^q |I_sigma|^t, evaluated in
// factorized form from per-family generation counts.
double log_partition_moment(const MoranMeasure& measure, double q, double t, std::int64_t k);
double partition_moment(const MoranMeasure& measure, double q, double t, std::int64_t k);

struct AuxiliaryStatistics {
    std::int64_t generation = 0;          // matched generation of r
    double renyi_integral = 0.0;          // Monte-Carlo estimate of int mu(B(x,r))^q dmu(x)
    double renyi_integral_stderr = 0.0;
    double renyi_entropy = 0.0;           // log(sum m^q) / (1 - q); Shannon entropy at q = 1
    double minkowski_volume = 0.0;        // r^{-1} int_{B(supp, r)} mu(B(x,r))^q dx
    std::size_t minkowski_zero_mass_nodes = 0;  // quadrature nodes skipped for q < 0
};

AuxiliaryStatistics auxiliary_statistics(const MoranMeasure& measure, double q, double r,
                                         std::size_t sample_count = 4096, std::uint64_t seed = 0);

// mu(B(x, a r)) / mu(B(x, r)) at one point.
double doubling_ratio_at(const MoranMeasure& measure, double x, double a, double r, std::int64_t depth);

// Max of the ratio over mu-distributed points and the given radii; a lower
// bound on the doubling constant at the probed scales.
double doubling_ratio(const MoranMeasure& measure, double a, std::span<const double> radii,
                      std::size_t sample_count = 4096, std::uint64_t seed = 0);

// Tables.  `radii` must be strictly decreasing; for the ball-based kinds the
// ball masses use depth = matched generation + extra_depth (capped).
MomentTable partition_moment_table(const MoranMeasure& measure, std::span<const double> q_grid,
                                   std::span<const double> log_radii);
MomentTable ball_moment_table(const MoranMeasure& measure, MomentKind kind, std::span<const double> q_grid,
                              std::span<const double> radii, std::int64_t extra_depth = 6);

// CSV with header `kind,q,r,value,flag`, q outer and r inner (descending).
// Entries whose radius or value leave the double range are written as natural
// logs with "_log" appended to the flag.
void write_moment_csv(std::ostream& out, const MomentTable& table);

}  // namespace hsmf
