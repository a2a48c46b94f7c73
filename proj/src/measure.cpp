#include "hsmf/measure.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "hsmf/numeric.hpp"

namespace hsmf {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonProbabilityVector: return "NonProbabilityVector";
    case ErrorCode::RatioOutOfRange: return "RatioOutOfRange";
    case ErrorCode::GapPolicyMismatch: return "GapPolicyMismatch";
    case ErrorCode::BadSchedule: return "BadSchedule";
    case ErrorCode::MalformedFamily: return "MalformedFamily";
    case ErrorCode::AddressOutOfRange: return "AddressOutOfRange";
    case ErrorCode::ScaleTooSmall: return "ScaleTooSmall";
    case ErrorCode::NoBracket: return "NoBracket";
    case ErrorCode::InsufficientScales: return "InsufficientScales";
    case ErrorCode::DegenerateGrid: return "DegenerateGrid";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::TooDeep: return "TooDeep";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

namespace {

constexpr double kSumTolerance = 1e-12;

}  // namespace

// ----------------------------------------------------------------- Schedule

Schedule Schedule::constant(std::size_t family, std::int64_t depth_cap) {
    Schedule s;
    s.kind_ = Kind::Constant;
    s.families_ = {family};
    s.depth_cap_ = depth_cap;
    return s;
}

Schedule Schedule::periodic(std::vector<std::size_t> families, std::int64_t depth_cap) {
    Schedule s;
    s.kind_ = Kind::Periodic;
    s.families_ = std::move(families);
    s.depth_cap_ = depth_cap;
    return s;
}

Schedule Schedule::blocks(std::vector<std::int64_t> boundaries, std::vector<std::size_t> families,
                          std::int64_t depth_cap) {
    Schedule s;
    s.kind_ = Kind::Blocks;
    s.boundaries_ = std::move(boundaries);
    s.families_ = std::move(families);
    s.depth_cap_ = depth_cap;
    return s;
}

std::size_t Schedule::family_at(std::int64_t generation) const {
    switch (kind_) {
    case Kind::Constant:
        return families_.front();
    case Kind::Periodic:
        return families_[static_cast<std::size_t>((generation - 1) % static_cast<std::int64_t>(families_.size()))];
    case Kind::Blocks: {
        auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), generation);
        const auto block = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - boundaries_.begin() - 1, 0));
        return families_[block % families_.size()];
    }
    }
    return families_.front();
}

std::vector<std::int64_t> Schedule::family_counts(std::int64_t k, std::size_t family_count) const {
    std::vector<std::int64_t> counts(family_count, 0);
    if (k <= 0) return counts;
    if (kind_ == Kind::Periodic) {
        const auto period = static_cast<std::int64_t>(families_.size());
        const std::int64_t cycles = k / period;
        const std::int64_t rest = k % period;
        for (std::int64_t i = 0; i < period; ++i) {
            counts[families_[static_cast<std::size_t>(i)]] += cycles + (i < rest ? 1 : 0);
        }
        return counts;
    }
    for_each_run(k, [&](std::size_t f, std::int64_t, std::int64_t len) { counts[f] += len; });
    return counts;
}

std::int64_t Schedule::natural_stride() const noexcept {
    return kind_ == Kind::Periodic ? static_cast<std::int64_t>(families_.size()) : 1;
}

double Schedule::max_boundary_ratio() const noexcept {
    double best = 1.0;
    for (std::size_t i = 1; i < boundaries_.size(); ++i) {
        best = std::max(best, static_cast<double>(boundaries_[i]) / static_cast<double>(boundaries_[i - 1]));
    }
    return best;
}

// --------------------------------------------------------------- validation

ValidationReport validate_spec(const MoranMeasureSpec& spec) {
    ValidationReport report;
    auto fail = [&](ErrorCode code, const std::string& msg) { report.violations.push_back({code, msg}); };

    if (spec.families.empty()) fail(ErrorCode::MalformedFamily, "no generation families");

    for (std::size_t f = 0; f < spec.families.size(); ++f) {
        const auto& fam = spec.families[f];
        const std::string where = "family " + std::to_string(f);
        if (fam.probs.size() != fam.ratios.size()) {
            fail(ErrorCode::MalformedFamily, where + ": probs and ratios differ in length");
            continue;
        }
        if (fam.arity() < 2) {
            fail(ErrorCode::MalformedFamily, where + ": arity must be at least 2");
            continue;
        }
        double psum = 0.0;
        bool positive = true;
        for (double p : fam.probs) {
            positive = positive && std::isfinite(p) && p > 0.0;
            psum += p;
        }
        if (!positive) fail(ErrorCode::NonProbabilityVector, where + ": probabilities must be positive");
        if (!(std::abs(psum - 1.0) <= kSumTolerance)) {
            std::ostringstream os;
            os.precision(17);
            os << where << ": probabilities sum to " << psum;
            fail(ErrorCode::NonProbabilityVector, os.str());
        }
        double csum = 0.0;
        bool in_range = true;
        for (double c : fam.ratios) {
            in_range = in_range && std::isfinite(c) && c > 0.0 && c < 1.0;
            csum += c;
        }
        if (!in_range) fail(ErrorCode::RatioOutOfRange, where + ": ratios must lie in (0, 1)");
        if (csum > 1.0 + kSumTolerance) fail(ErrorCode::RatioOutOfRange, where + ": ratios sum above 1");
        if (in_range && csum <= 1.0 + kSumTolerance) {
            std::ostringstream os;
            os.precision(17);
            if (spec.gap_policy == GapPolicy::NoGaps && std::abs(csum - 1.0) > kSumTolerance) {
                os << where << ": no_gaps needs ratios summing to 1, got " << csum;
                fail(ErrorCode::GapPolicyMismatch, os.str());
            } else if (spec.gap_policy == GapPolicy::EqualGaps && csum >= 1.0 - kSumTolerance) {
                os << where << ": equal_gaps needs ratios summing below 1, got " << csum;
                fail(ErrorCode::GapPolicyMismatch, os.str());
            }
        }
    }

    const auto& s = spec.schedule;
    if (s.depth_cap() < 1) fail(ErrorCode::BadSchedule, "depth_cap must be positive");
    if (s.families().empty()) fail(ErrorCode::BadSchedule, "schedule references no family");
    for (std::size_t i = 0; i < s.families().size(); ++i) {
        if (s.families()[i] >= spec.families.size()) {
            fail(ErrorCode::BadSchedule, "schedule entry " + std::to_string(i) + " references missing family " +
                                             std::to_string(s.families()[i]));
        }
    }
    if (s.kind() == Schedule::Kind::Blocks) {
        const auto& b = s.boundaries();
        if (b.empty() || b.front() != 1) fail(ErrorCode::BadSchedule, "block boundaries must start at 1");
        for (std::size_t i = 1; i < b.size(); ++i) {
            if (b[i] <= b[i - 1]) {
                fail(ErrorCode::BadSchedule, "block boundaries not strictly increasing at index " + std::to_string(i));
            }
        }
    }
    return report;
}

// ------------------------------------------------------------ MoranMeasure

MoranMeasure::MoranMeasure(MoranMeasureSpec spec) : spec_(std::move(spec)) {
    const auto report = validate_spec(spec_);
    if (!report.ok()) throw Error(report.violations.front().code, report.violations.front().message);

    for (const auto& fam : spec_.families) {
        std::vector<double> lp, lc, off;
        double cmax = 0.0;
        for (std::size_t i = 0; i < fam.arity(); ++i) {
            lp.push_back(std::log(fam.probs[i]));
            lc.push_back(std::log(fam.ratios[i]));
            cmax = std::max(cmax, fam.ratios[i]);
        }
        const double csum = std::accumulate(fam.ratios.begin(), fam.ratios.end(), 0.0);
        const double g = spec_.gap_policy == GapPolicy::EqualGaps
                             ? (1.0 - csum) / static_cast<double>(fam.arity() - 1)
                             : 0.0;
        double x = 0.0;
        for (std::size_t i = 0; i < fam.arity(); ++i) {
            off.push_back(x);
            x += fam.ratios[i] + g;
        }
        const bool constant = std::all_of(fam.ratios.begin(), fam.ratios.end(),
                                          [&](double c) { return c == fam.ratios.front(); });
        log_probs_.push_back(std::move(lp));
        log_ratios_.push_back(std::move(lc));
        offsets_.push_back(std::move(off));
        log_max_ratio_.push_back(std::log(cmax));
        constant_ratio_.push_back(constant ? 1 : 0);
    }
}

bool MoranMeasure::all_constant_ratios() const noexcept {
    return std::all_of(constant_ratio_.begin(), constant_ratio_.end(), [](char c) { return c != 0; });
}

double MoranMeasure::gap(std::size_t f) const {
    const auto& fam = family(f);
    if (spec_.gap_policy == GapPolicy::NoGaps) return 0.0;
    const double csum = std::accumulate(fam.ratios.begin(), fam.ratios.end(), 0.0);
    return (1.0 - csum) / static_cast<double>(fam.arity() - 1);
}

double MoranMeasure::separation_constant() const {
    double delta = std::numeric_limits<double>::infinity();
    for (std::size_t f : spec_.schedule.families()) {
        const auto& c = family(f).ratios;
        delta = std::min(delta, gap(f) / *std::max_element(c.begin(), c.end()));
    }
    return delta;
}

double MoranMeasure::log_max_length(std::int64_t k) const {
    if (k <= 0) return 0.0;
    const auto counts = spec_.schedule.family_counts(k, family_count());
    double acc = 0.0;
    for (std::size_t f = 0; f < counts.size(); ++f) acc += static_cast<double>(counts[f]) * log_max_ratio_[f];
    return acc;
}

std::int64_t MoranMeasure::matched_generation(double r) const {
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
    return matched_generation_log(std::log(r));
}

std::int64_t MoranMeasure::matched_generation_log(double log_r) const {
    const double tol = 1e-12 * std::max(1.0, std::abs(log_r));
    if (log_r >= -tol) return 0;
    const std::int64_t cap = depth_cap();
    if (log_max_length(cap) > log_r + tol) {
        throw Error(ErrorCode::ScaleTooSmall, "radius below the deepest generation (depth_cap " +
                                                  std::to_string(cap) + ")");
    }
    std::int64_t lo = 1, hi = cap;
    while (lo < hi) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (log_max_length(mid) <= log_r + tol) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return lo;
}

std::int64_t MoranMeasure::cell_count(std::int64_t k) const {
    const auto counts = spec_.schedule.family_counts(k, family_count());
    std::int64_t total = 1;
    constexpr auto kMax = std::numeric_limits<std::int64_t>::max();
    for (std::size_t f = 0; f < counts.size(); ++f) {
        const auto n = static_cast<std::int64_t>(family(f).arity());
        for (std::int64_t i = 0; i < counts[f]; ++i) {
            if (total > kMax / n) return kMax;
            total *= n;
        }
    }
    return total;
}

// ------------------------------------------------------------- geometry

Interval interval_of(const MoranMeasure& measure, const NodeAddress& address) {
    const auto k = static_cast<std::int64_t>(address.depth());
    if (k > measure.depth_cap()) throw Error(ErrorCode::AddressOutOfRange, "address deeper than depth_cap");
    Interval out;
    double mass = 1.0;
    for (std::int64_t g = 1; g <= k; ++g) {
        const std::size_t f = measure.schedule().family_at(g);
        const std::uint32_t i = address.path[static_cast<std::size_t>(g - 1)];
        if (i >= measure.family(f).arity()) {
            throw Error(ErrorCode::AddressOutOfRange,
                        "child " + std::to_string(i) + " at generation " + std::to_string(g));
        }
        out.left += out.length * measure.child_offsets(f)[i];
        out.length *= measure.family(f).ratios[i];
        mass *= measure.family(f).probs[i];
        out.log_length += measure.log_ratios(f)[i];
        out.log_mass += measure.log_probs(f)[i];
    }
    out.mass = mass;
    return out;
}

BallMass ball_mass(const MoranMeasure& measure, double x, double r, std::int64_t depth) {
    if (depth < 0 || depth > measure.depth_cap()) {
        throw Error(ErrorCode::InvalidArgument, "ball_mass depth outside [0, depth_cap]");
    }
    const double lo = std::max(0.0, x - r);
    const double hi = std::min(1.0, x + r);
    BallMass out;
    if (!(lo < hi)) return out;

    struct Node {
        std::int64_t generation;
        double left;
        double length;
        double mass;
    };
    std::vector<Node> stack{{0, 0.0, 1.0, 1.0}};
    while (!stack.empty()) {
        const Node node = stack.back();
        stack.pop_back();
        const double right = node.left + node.length;
        // Touching at a single point carries no mass.
        if (right <= lo || node.left >= hi) continue;
        if (node.left >= lo && right <= hi) {
            out.mass += node.mass;
            continue;
        }
        if (node.generation == depth) {
            const double mid = node.left + 0.5 * node.length;
            if (mid >= lo && mid <= hi) out.mass += node.mass;
            out.error_bound += node.mass;
            continue;
        }
        const std::int64_t g = node.generation + 1;
        const std::size_t f = measure.schedule().family_at(g);
        const auto& fam = measure.family(f);
        const auto offsets = measure.child_offsets(f);
        // Push right-to-left so children pop in left-to-right order.
        for (std::size_t i = fam.arity(); i-- > 0;) {
            stack.push_back({g, node.left + node.length * offsets[i], node.length * fam.ratios[i],
                             node.mass * fam.probs[i]});
        }
    }
    return out;
}

// ------------------------------------------------------------- sampling

std::vector<double> tilt_probabilities(const MoranMeasure& measure, std::size_t f, double q, double t) {
    const auto lp = measure.log_probs(f);
    const auto lc = measure.log_ratios(f);
    std::vector<double> w(lp.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = q * lp[i] + t * lc[i];
    const double norm = log_sum_exp(w);
    for (double& v : w) v = std::exp(v - norm);
    return w;
}

TiltedSampler::TiltedSampler(const MoranMeasure& measure, double q, double t) : measure_(&measure) {
    for (std::size_t f = 0; f < measure.family_count(); ++f) {
        const auto lp = measure.log_probs(f);
        const auto lc = measure.log_ratios(f);
        std::vector<double> w(lp.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = q * lp[i] + t * lc[i];
        const double norm = log_sum_exp(w);
        std::vector<double> logp(w.size()), cum(w.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            logp[i] = w[i] - norm;
            acc += std::exp(logp[i]);
            cum[i] = acc;
        }
        cum.back() = std::numeric_limits<double>::infinity();
        log_tilt_.push_back(std::move(logp));
        cumulative_.push_back(std::move(cum));
    }
}

PathDraw TiltedSampler::draw(std::int64_t depth, Rng& rng, NodeAddress* address) const {
    PathDraw out;
    if (address) {
        address->path.clear();
        address->path.reserve(static_cast<std::size_t>(depth));
    }
    measure_->schedule().for_each_run(depth, [&](std::size_t f, std::int64_t, std::int64_t len) {
        const auto& cum = cumulative_[f];
        const auto lp = measure_->log_probs(f);
        const auto lc = measure_->log_ratios(f);
        for (std::int64_t j = 0; j < len; ++j) {
            const double u = rng.uniform();
            const auto i = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
            out.log_mass += lp[i];
            out.log_length += lc[i];
            out.log_tilt_probability += log_tilt_[f][i];
            if (address) address->path.push_back(static_cast<std::uint32_t>(i));
        }
    });
    return out;
}

NodeAddress sample_path(const MoranMeasure& measure, double q, double t, std::int64_t depth, std::uint64_t seed) {
    if (depth < 0 || depth > measure.depth_cap()) {
        throw Error(ErrorCode::InvalidArgument, "sample depth outside [0, depth_cap]");
    }
    TiltedSampler sampler(measure, q, t);
    Rng rng(seed);
    NodeAddress address;
    sampler.draw(depth, rng, &address);
    return address;
}

// ------------------------------------------------------------- enumeration

std::vector<Cell> enumerate_cells(const MoranMeasure& measure, std::int64_t k, std::int64_t max_cells) {
    if (k < 0 || k > measure.depth_cap()) throw Error(ErrorCode::ScaleTooSmall, "generation outside depth_cap");
    if (measure.cell_count(k) > max_cells) {
        throw Error(ErrorCode::ScaleTooSmall, "generation " + std::to_string(k) + " has more than " +
                                                  std::to_string(max_cells) + " cells");
    }
    std::vector<Cell> cells{{0.0, 1.0, 1.0}};
    for (std::int64_t g = 1; g <= k; ++g) {
        const std::size_t f = measure.schedule().family_at(g);
        const auto& fam = measure.family(f);
        const auto offsets = measure.child_offsets(f);
        std::vector<Cell> next;
        next.reserve(cells.size() * fam.arity());
        for (const Cell& c : cells) {
            for (std::size_t i = 0; i < fam.arity(); ++i) {
                next.push_back({c.left + c.length * offsets[i], c.length * fam.ratios[i], c.mass * fam.probs[i]});
            }
        }
        cells = std::move(next);
    }
    return cells;
}

}  // namespace hsmf
