#pragma once

// Homogeneous Moran measures on [0, 1].
//
// A measure is generated by nested interval families: at generation j every
// cell splits into n_j children with length contractions c_{j,i} and mass
// fractions p_{j,i}.  Which family applies at generation j is decided by a
// Schedule.  Children are laid out left to right, either abutting (NoGaps,
// the full-support n-adic case) or separated by equal gaps (EqualGaps, which
// gives the strong separation condition with a computable constant).
//
// Child indices in a NodeAddress are 0-based.  Generations are 1-based:
// generation 0 is the root interval [0, 1].

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hsmf/error.hpp"
#include "hsmf/random.hpp"

namespace hsmf {

enum class GapPolicy { EqualGaps, NoGaps };

struct GenerationFamily {
    std::vector<double> probs;
    std::vector<double> ratios;

    std::size_t arity() const noexcept { return probs.size(); }
};

class Schedule {
public:
    enum class Kind { Constant, Periodic, Blocks };

    static Schedule constant(std::size_t family, std::int64_t depth_cap);
    static Schedule periodic(std::vector<std::size_t> families, std::int64_t depth_cap);
    // Generation g uses families[i mod families.size()] where i is the index of
    // the last boundary <= g.  boundaries[0] must be 1.
    static Schedule blocks(std::vector<std::int64_t> boundaries, std::vector<std::size_t> families,
                           std::int64_t depth_cap);

    Kind kind() const noexcept { return kind_; }
    std::int64_t depth_cap() const noexcept { return depth_cap_; }
    const std::vector<std::size_t>& families() const noexcept { return families_; }
    const std::vector<std::int64_t>& boundaries() const noexcept { return boundaries_; }

    // Family index used at 1-based generation g (g >= 1).
    std::size_t family_at(std::int64_t generation) const;

    // Number of generations 1..k that use each family.
    std::vector<std::int64_t> family_counts(std::int64_t k, std::size_t family_count) const;

    // Calls fn(family, first_generation, run_length) for maximal runs of
    // generations 1..k sharing a family, in increasing generation order.
    template <class Fn>
    void for_each_run(std::int64_t k, Fn&& fn) const;

    // Period of the schedule (1 for constant and block schedules).  Sampling
    // generations on multiples of this stride hits the exact periodic limit.
    std::int64_t natural_stride() const noexcept;

    // Largest T_{i+1}/T_i among the block boundaries (1 for other kinds).
    // Diagnostic for how well a finite prefix mimics T_{i+1}/T_i -> infinity.
    double max_boundary_ratio() const noexcept;

private:
    Kind kind_ = Kind::Constant;
    std::vector<std::size_t> families_;
    std::vector<std::int64_t> boundaries_;
    std::int64_t depth_cap_ = 1;
};

struct MoranMeasureSpec {
    std::vector<GenerationFamily> families;
    Schedule schedule;
    GapPolicy gap_policy = GapPolicy::NoGaps;
};

struct Violation {
    ErrorCode code;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
};

ValidationReport validate_spec(const MoranMeasureSpec& spec);

struct NodeAddress {
    std::vector<std::uint32_t> path;

    std::size_t depth() const noexcept { return path.size(); }
};

struct Interval {
    double left = 0.0;
    double length = 1.0;
    double mass = 1.0;
    double log_length = 0.0;
    double log_mass = 0.0;
};

struct BallMass {
    double mass = 0.0;
    double error_bound = 0.0;
};

// Per-path summary of a tilted draw; log quantities are natural logs.
struct PathDraw {
    double log_mass = 0.0;
    double log_length = 0.0;
    double log_tilt_probability = 0.0;
};

// Precomputed, immutable view of a validated spec.  All operations are const
// and safe to call concurrently.
class MoranMeasure {
public:
    // Throws Error(first violation code) when the spec is invalid.
    explicit MoranMeasure(MoranMeasureSpec spec);

    const MoranMeasureSpec& spec() const noexcept { return spec_; }
    const Schedule& schedule() const noexcept { return spec_.schedule; }
    std::int64_t depth_cap() const noexcept { return spec_.schedule.depth_cap(); }
    std::size_t family_count() const noexcept { return spec_.families.size(); }
    const GenerationFamily& family(std::size_t f) const { return spec_.families.at(f); }
    const GenerationFamily& family_at(std::int64_t generation) const {
        return spec_.families[spec_.schedule.family_at(generation)];
    }

    std::span<const double> log_probs(std::size_t f) const { return log_probs_.at(f); }
    std::span<const double> log_ratios(std::size_t f) const { return log_ratios_.at(f); }
    // Left offset of child i inside its parent, in units of the parent length.
    std::span<const double> child_offsets(std::size_t f) const { return offsets_.at(f); }
    double log_max_ratio(std::size_t f) const { return log_max_ratio_.at(f); }
    bool has_constant_ratio(std::size_t f) const { return constant_ratio_.at(f) != 0; }
    bool all_constant_ratios() const noexcept;

    // Relative gap between siblings for family f (0 for NoGaps).
    double gap(std::size_t f) const;
    // inf_k g_k / max_j c_{k,j} over the families in use (0 for NoGaps).
    double separation_constant() const;

    // log of the largest cell length at generation k (k >= 0).
    double log_max_length(std::int64_t k) const;

    // Smallest generation whose largest cell is no longer than r.
    // Throws ScaleTooSmall when that exceeds depth_cap.
    std::int64_t matched_generation(double r) const;
    std::int64_t matched_generation_log(double log_r) const;

    std::int64_t cell_count(std::int64_t k) const;  // saturates at INT64_MAX

private:
    MoranMeasureSpec spec_;
    std::vector<std::vector<double>> log_probs_;
    std::vector<std::vector<double>> log_ratios_;
    std::vector<std::vector<double>> offsets_;
    std::vector<double> log_max_ratio_;
    std::vector<char> constant_ratio_;
};

Interval interval_of(const MoranMeasure& measure, const NodeAddress& address);

// mu(B(x, r)) by tree descent.  Subtrees fully inside [x-r, x+r] contribute
// their whole mass; at the truncation depth a partially covered cell counts
// iff its midpoint is inside, and its mass is added to error_bound.
BallMass ball_mass(const MoranMeasure& measure, double x, double r, std::int64_t depth);

// Child probabilities p^q c^t / sum_m p_m^q c_m^t for family f.
std::vector<double> tilt_probabilities(const MoranMeasure& measure, std::size_t f, double q, double t);

// Draws a path of the given depth from the (q, t)-tilted measure.
NodeAddress sample_path(const MoranMeasure& measure, double q, double t, std::int64_t depth,
                        std::uint64_t seed);

// Reusable tilted sampler; cumulative tables are built once per (q, t).
class TiltedSampler {
public:
    TiltedSampler(const MoranMeasure& measure, double q, double t);

    PathDraw draw(std::int64_t depth, Rng& rng, NodeAddress* address = nullptr) const;

private:
    const MoranMeasure* measure_;
    std::vector<std::vector<double>> cumulative_;
    std::vector<std::vector<double>> log_tilt_;
};

struct Cell {
    double left;
    double length;
    double mass;
};

// All cells of generation k in left-to-right order.  Throws ScaleTooSmall if
// there are more than max_cells of them.
std::vector<Cell> enumerate_cells(const MoranMeasure& measure, std::int64_t k,
                                  std::int64_t max_cells = std::int64_t{1} << 22);

// ---------------------------------------------------------------------------

template <class Fn>
void Schedule::for_each_run(std::int64_t k, Fn&& fn) const {
    if (k <= 0) return;
    switch (kind_) {
    case Kind::Constant:
        fn(families_.front(), std::int64_t{1}, k);
        return;
    case Kind::Periodic:
        for (std::int64_t g = 1; g <= k; ++g) {
            fn(families_[static_cast<std::size_t>((g - 1) % static_cast<std::int64_t>(families_.size()))], g,
               std::int64_t{1});
        }
        return;
    case Kind::Blocks:
        for (std::size_t i = 0; i < boundaries_.size(); ++i) {
            const std::int64_t first = boundaries_[i];
            if (first > k) break;
            const std::int64_t end = (i + 1 < boundaries_.size()) ? std::min(boundaries_[i + 1] - 1, k) : k;
            fn(families_[i % families_.size()], first, end - first + 1);
        }
        return;
    }
}

}  // namespace hsmf
