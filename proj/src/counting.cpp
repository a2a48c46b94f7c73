#include "hsmf/counting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include "hsmf/numeric.hpp"

namespace hsmf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_radius(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
}

std::int64_t ball_depth(const MoranMeasure& measure, std::int64_t k, std::int64_t depth) {
    return std::min(measure.depth_cap(), std::max(k, depth));
}

// log sum_i m_i^q over the given centers.
double log_moment(std::span<const double> masses, std::span<const std::size_t> centers, double q) {
    if (q == 0.0) return std::log(static_cast<double>(centers.size()));
    std::vector<double> terms;
    terms.reserve(centers.size());
    for (std::size_t i : centers) terms.push_back(q * std::log(masses[i]));
    return log_sum_exp(terms);
}

struct PackingSets {
    std::vector<std::size_t> leftmost;
    std::vector<std::size_t> heavy;
    std::vector<std::size_t> light;
};

PackingSets packing_sets(const SupportModel& support, std::span<const double> masses, double r) {
    PackingSets sets;
    sets.leftmost = greedy_packing(support, r);
    sets.heavy = greedy_packing_by_weight(support, masses, r);
    std::vector<double> negated(masses.begin(), masses.end());
    for (double& m : negated) m = -m;
    sets.light = greedy_packing_by_weight(support, negated, r);
    return sets;
}

double best_packing_log_moment(const PackingSets& sets, std::span<const double> masses, double q,
                               std::size_t* count) {
    if (q == 0.0) {
        if (count) *count = sets.leftmost.size();
        return std::log(static_cast<double>(sets.leftmost.size()));
    }
    double best = -kInf;
    for (const auto* s : {&sets.leftmost, &sets.heavy, &sets.light}) {
        const double v = log_moment(masses, *s, q);
        if (v > best) {
            best = v;
            if (count) *count = s->size();
        }
    }
    return best;
}

}  // namespace

std::string_view to_string(MomentKind kind) {
    switch (kind) {
    case MomentKind::CoveringMoment: return "covering_moment";
    case MomentKind::PackingMoment: return "packing_moment";
    case MomentKind::PartitionMoment: return "partition_moment";
    case MomentKind::CoveringCount: return "covering_count";
    case MomentKind::PackingCount: return "packing_count";
    }
    return "unknown";
}

std::string_view to_string(MomentFlag flag) {
    switch (flag) {
    case MomentFlag::Exact: return "exact";
    case MomentFlag::Greedy: return "greedy";
    case MomentFlag::Heuristic: return "heuristic";
    }
    return "unknown";
}

// ------------------------------------------------------------- support

SupportModel::SupportModel(const MoranMeasure& measure, std::int64_t generation, std::int64_t max_cells)
    : generation_(generation), cells_(enumerate_cells(measure, generation, max_cells)) {
    candidates_.reserve(2 * cells_.size());
    for (const Cell& c : cells_) {
        candidates_.push_back(c.left);
        candidates_.push_back(c.left + c.length);
    }
    std::sort(candidates_.begin(), candidates_.end());
    // Abutting cells produce the same endpoint twice, sometimes one ulp apart.
    std::vector<double> unique;
    unique.reserve(candidates_.size());
    for (double x : candidates_) {
        if (unique.empty() || x - unique.back() > 1e-15) unique.push_back(x);
    }
    candidates_ = std::move(unique);

    for (const Cell& c : cells_) {
        const double right = c.left + c.length;
        if (!merged_.empty() && c.left <= merged_.back().second + kGeometryTolerance) {
            merged_.back().second = std::max(merged_.back().second, right);
        } else {
            merged_.emplace_back(c.left, right);
        }
    }
}

double SupportModel::next_support_after(double y) const {
    auto it = std::upper_bound(merged_.begin(), merged_.end(), y,
                               [](double v, const std::pair<double, double>& iv) { return v < iv.first; });
    if (it != merged_.begin()) {
        const auto& prev = *std::prev(it);
        if (y < prev.second) return y;
    }
    return it == merged_.end() ? kInf : it->first;
}

// ------------------------------------------------------------- greedy sets

std::vector<std::size_t> greedy_cover(const SupportModel& support, double r) {
    check_radius(r);
    const auto cand = support.candidates();
    std::vector<std::size_t> centers;
    double a = support.first_point();
    while (std::isfinite(a)) {
        auto it = std::upper_bound(cand.begin(), cand.end(), a + r + kGeometryTolerance);
        const auto i = static_cast<std::size_t>(it - cand.begin()) - 1;
        centers.push_back(i);
        a = support.next_support_after(cand[i] + r + kGeometryTolerance);
    }
    return centers;
}

std::vector<std::size_t> greedy_packing(const SupportModel& support, double r) {
    check_radius(r);
    const auto cand = support.candidates();
    std::vector<std::size_t> chosen{0};
    for (std::size_t i = 1; i < cand.size(); ++i) {
        if (cand[i] >= cand[chosen.back()] + r - kGeometryTolerance) chosen.push_back(i);
    }
    return chosen;
}

std::vector<std::size_t> greedy_packing_by_weight(const SupportModel& support, std::span<const double> weights,
                                                  double r) {
    check_radius(r);
    const auto cand = support.candidates();
    std::vector<std::size_t> order(cand.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
    std::set<double> taken;
    std::vector<std::size_t> chosen;
    for (std::size_t i : order) {
        const double x = cand[i];
        auto hi = taken.lower_bound(x);
        if (hi != taken.end() && *hi - x < r - kGeometryTolerance) continue;
        if (hi != taken.begin() && x - *std::prev(hi) < r - kGeometryTolerance) continue;
        taken.insert(x);
        chosen.push_back(i);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

std::vector<double> center_masses(const MoranMeasure& measure, const SupportModel& support, double r,
                                  std::int64_t depth) {
    const auto cand = support.candidates();
    const std::int64_t d = ball_depth(measure, support.generation(), depth);
    std::vector<double> out(cand.size());
    for (std::size_t i = 0; i < cand.size(); ++i) out[i] = ball_mass(measure, cand[i], r, d).mass;
    return out;
}

// ------------------------------------------------------------- counts and moments

std::int64_t covering_count(const MoranMeasure& measure, double r) {
    check_radius(r);
    const SupportModel support(measure, measure.matched_generation(r));
    return static_cast<std::int64_t>(greedy_cover(support, r).size());
}

std::int64_t packing_count(const MoranMeasure& measure, double r) {
    check_radius(r);
    const SupportModel support(measure, measure.matched_generation(r));
    return static_cast<std::int64_t>(greedy_packing(support, r).size());
}

MomentValue covering_moment(const MoranMeasure& measure, double q, double r, std::int64_t depth) {
    check_radius(r);
    const SupportModel support(measure, measure.matched_generation(r));
    const auto centers = greedy_cover(support, r);
    const std::int64_t d = ball_depth(measure, support.generation(), depth);
    std::vector<double> masses(support.candidates().size(), 0.0);
    for (std::size_t i : centers) masses[i] = ball_mass(measure, support.candidates()[i], r, d).mass;
    MomentValue out;
    out.center_count = centers.size();
    out.flag = q < 0.0 ? MomentFlag::Heuristic : MomentFlag::Greedy;
    out.log_value = log_moment(masses, centers, q);
    out.value = q == 0.0 ? static_cast<double>(centers.size()) : std::exp(out.log_value);
    return out;
}

MomentValue packing_moment(const MoranMeasure& measure, double q, double r, std::int64_t depth) {
    check_radius(r);
    const SupportModel support(measure, measure.matched_generation(r));
    const auto masses = center_masses(measure, support, r, depth);
    const auto sets = packing_sets(support, masses, r);
    MomentValue out;
    out.flag = MomentFlag::Greedy;
    out.log_value = best_packing_log_moment(sets, masses, q, &out.center_count);
    out.value = q == 0.0 ? static_cast<double>(out.center_count) : std::exp(out.log_value);
    return out;
}

double family_log_partition(const MoranMeasure& measure, std::size_t family, double q, double t) {
    if (q == 1.0 && t == 0.0) return 0.0;
    const auto lp = measure.log_probs(family);
    const auto lc = measure.log_ratios(family);
    std::vector<double> terms(lp.size());
    for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = q * lp[i] + t * lc[i];
    return log_sum_exp(terms);
}

double log_partition_moment(const MoranMeasure& measure, double q, double t, std::int64_t k) {
    if (k < 0 || k > measure.depth_cap()) throw Error(ErrorCode::InvalidArgument, "generation outside depth_cap");
    if (q == 1.0 && t == 0.0) return 0.0;
    const auto counts = measure.schedule().family_counts(k, measure.family_count());
    double acc = 0.0;
    for (std::size_t f = 0; f < counts.size(); ++f) {
        if (counts[f] != 0) acc += static_cast<double>(counts[f]) * family_log_partition(measure, f, q, t);
    }
    return acc;
}

double partition_moment(const MoranMeasure& measure, double q, double t, std::int64_t k) {
    return std::exp(log_partition_moment(measure, q, t, k));
}

// ------------------------------------------------------------- auxiliary statistics

namespace {

// A mu-distributed point: a tilted (1, 0) path to `depth`, then a uniform
// position inside the final cell.
double sample_point(const MoranMeasure& measure, const TiltedSampler& sampler, std::int64_t depth, Rng& rng) {
    NodeAddress address;
    sampler.draw(depth, rng, &address);
    const Interval cell = interval_of(measure, address);
    return cell.left + rng.uniform() * cell.length;
}

double shannon_entropy(const MoranMeasure& measure, std::int64_t k) {
    const auto counts = measure.schedule().family_counts(k, measure.family_count());
    double h = 0.0;
    for (std::size_t f = 0; f < counts.size(); ++f) {
        if (counts[f] == 0) continue;
        double hf = 0.0;
        const auto& probs = measure.family(f).probs;
        const auto lp = measure.log_probs(f);
        for (std::size_t i = 0; i < probs.size(); ++i) hf -= probs[i] * lp[i];
        h += static_cast<double>(counts[f]) * hf;
    }
    return h;
}

}  // namespace

AuxiliaryStatistics auxiliary_statistics(const MoranMeasure& measure, double q, double r, std::size_t sample_count,
                                         std::uint64_t seed) {
    check_radius(r);
    if (sample_count == 0) throw Error(ErrorCode::InvalidArgument, "sample_count must be positive");
    AuxiliaryStatistics out;
    const std::int64_t k = measure.matched_generation(r);
    const std::int64_t deep = std::min(measure.depth_cap(), k + 8);
    out.generation = k;

    const TiltedSampler sampler(measure, 1.0, 0.0);
    Rng rng(seed);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t s = 0; s < sample_count; ++s) {
        const double x = sample_point(measure, sampler, deep, rng);
        const double v = std::pow(ball_mass(measure, x, r, deep).mass, q);
        sum += v;
        sum_sq += v * v;
    }
    const double n = static_cast<double>(sample_count);
    out.renyi_integral = sum / n;
    if (sample_count > 1) {
        const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
        out.renyi_integral_stderr = std::sqrt(var / n);
    }

    out.renyi_entropy = q == 1.0 ? shannon_entropy(measure, k) : log_partition_moment(measure, q, 0.0, k) / (1.0 - q);

    // Midpoint quadrature over the r-neighbourhood of the support.
    const SupportModel support(measure, k);
    std::vector<std::pair<double, double>> hood;
    for (const Cell& c : support.cells()) {
        const double lo = c.left - r;
        const double hi = c.left + c.length + r;
        if (!hood.empty() && lo <= hood.back().second) {
            hood.back().second = std::max(hood.back().second, hi);
        } else {
            hood.emplace_back(lo, hi);
        }
    }
    const double step = r / 32.0;
    double integral = 0.0;
    for (const auto& [lo, hi] : hood) {
        const double len = hi - lo;
        const auto nodes = static_cast<std::int64_t>(std::max(1.0, std::ceil(len / step)));
        const double w = len / static_cast<double>(nodes);
        double part = 0.0;
        for (std::int64_t j = 0; j < nodes; ++j) {
            const double x = lo + (static_cast<double>(j) + 0.5) * w;
            if (q == 0.0) {
                part += 1.0;
                continue;
            }
            const double m = ball_mass(measure, x, r, deep).mass;
            if (m <= 0.0) {
                if (q < 0.0) ++out.minkowski_zero_mass_nodes;
                continue;
            }
            part += std::pow(m, q);
        }
        integral += part * w;
    }
    out.minkowski_volume = integral / r;
    return out;
}

double doubling_ratio_at(const MoranMeasure& measure, double x, double a, double r, std::int64_t depth) {
    check_radius(r);
    if (!(a > 1.0)) throw Error(ErrorCode::ParameterOutOfRange, "doubling factor a must exceed 1");
    const double small = ball_mass(measure, x, r, depth).mass;
    const double big = ball_mass(measure, x, a * r, depth).mass;
    return small > 0.0 ? big / small : kInf;
}

double doubling_ratio(const MoranMeasure& measure, double a, std::span<const double> radii, std::size_t sample_count,
                      std::uint64_t seed) {
    if (!(a > 1.0)) throw Error(ErrorCode::ParameterOutOfRange, "doubling factor a must exceed 1");
    if (radii.empty() || sample_count == 0) throw Error(ErrorCode::InvalidArgument, "need radii and samples");
    double r_min = kInf;
    for (double r : radii) {
        check_radius(r);
        r_min = std::min(r_min, r);
    }
    const std::int64_t deep = std::min(measure.depth_cap(), measure.matched_generation(r_min) + 8);
    const TiltedSampler sampler(measure, 1.0, 0.0);
    Rng rng(seed);
    double best = 1.0;
    for (std::size_t s = 0; s < sample_count; ++s) {
        const double x = sample_point(measure, sampler, deep, rng);
        for (double r : radii) best = std::max(best, doubling_ratio_at(measure, x, a, r, deep));
    }
    return best;
}

// ------------------------------------------------------------- tables

namespace {

void check_decreasing(std::span<const double> log_radii) {
    if (log_radii.empty()) throw Error(ErrorCode::InvalidArgument, "no radii");
    for (std::size_t i = 0; i < log_radii.size(); ++i) {
        if (!std::isfinite(log_radii[i])) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
        if (i > 0 && !(log_radii[i] < log_radii[i - 1])) {
            throw Error(ErrorCode::InvalidArgument, "radii must be strictly decreasing");
        }
    }
}

}  // namespace

MomentTable partition_moment_table(const MoranMeasure& measure, std::span<const double> q_grid,
                                   std::span<const double> log_radii) {
    check_decreasing(log_radii);
    MomentTable table;
    table.kind = MomentKind::PartitionMoment;
    table.q_grid.assign(q_grid.begin(), q_grid.end());
    table.log_scales.assign(log_radii.begin(), log_radii.end());
    table.log_values.resize(q_grid.size() * log_radii.size());
    table.flags.assign(table.log_values.size(), MomentFlag::Exact);
    std::vector<std::int64_t> gens;
    for (double lr : log_radii) gens.push_back(measure.matched_generation_log(lr));
    for (std::size_t iq = 0; iq < q_grid.size(); ++iq) {
        for (std::size_t ir = 0; ir < gens.size(); ++ir) {
            table.log_values[table.index(iq, ir)] = log_partition_moment(measure, q_grid[iq], 0.0, gens[ir]);
        }
    }
    return table;
}

MomentTable ball_moment_table(const MoranMeasure& measure, MomentKind kind, std::span<const double> q_grid,
                              std::span<const double> radii, std::int64_t extra_depth) {
    if (kind == MomentKind::PartitionMoment) {
        std::vector<double> logs;
        for (double r : radii) logs.push_back(std::log(r));
        return partition_moment_table(measure, q_grid, logs);
    }
    std::vector<double> log_radii;
    for (double r : radii) {
        check_radius(r);
        log_radii.push_back(std::log(r));
    }
    check_decreasing(log_radii);

    MomentTable table;
    table.kind = kind;
    table.q_grid.assign(q_grid.begin(), q_grid.end());
    table.log_scales = log_radii;
    table.log_values.resize(q_grid.size() * radii.size());
    table.flags.assign(table.log_values.size(), MomentFlag::Greedy);

    for (std::size_t ir = 0; ir < radii.size(); ++ir) {
        const double r = radii[ir];
        const SupportModel support(measure, measure.matched_generation(r));
        switch (kind) {
        case MomentKind::CoveringCount:
        case MomentKind::PackingCount: {
            const auto n = kind == MomentKind::CoveringCount ? greedy_cover(support, r).size()
                                                             : greedy_packing(support, r).size();
            for (std::size_t iq = 0; iq < q_grid.size(); ++iq) {
                table.log_values[table.index(iq, ir)] = std::log(static_cast<double>(n));
            }
            break;
        }
        case MomentKind::CoveringMoment: {
            const auto centers = greedy_cover(support, r);
            const std::int64_t d = ball_depth(measure, support.generation(), support.generation() + extra_depth);
            std::vector<double> masses(support.candidates().size(), 0.0);
            for (std::size_t i : centers) masses[i] = ball_mass(measure, support.candidates()[i], r, d).mass;
            for (std::size_t iq = 0; iq < q_grid.size(); ++iq) {
                table.log_values[table.index(iq, ir)] = log_moment(masses, centers, q_grid[iq]);
                if (q_grid[iq] < 0.0) table.flags[table.index(iq, ir)] = MomentFlag::Heuristic;
            }
            break;
        }
        case MomentKind::PackingMoment: {
            const auto masses = center_masses(measure, support, r, support.generation() + extra_depth);
            const auto sets = packing_sets(support, masses, r);
            for (std::size_t iq = 0; iq < q_grid.size(); ++iq) {
                table.log_values[table.index(iq, ir)] = best_packing_log_moment(sets, masses, q_grid[iq], nullptr);
            }
            break;
        }
        case MomentKind::PartitionMoment:
            break;
        }
    }
    return table;
}

void write_moment_csv(std::ostream& out, const MomentTable& table) {
    const bool counts = table.kind == MomentKind::CoveringCount || table.kind == MomentKind::PackingCount;
    out << "kind,q,r,value,flag\n";
    for (std::size_t iq = 0; iq < table.q_grid.size(); ++iq) {
        for (std::size_t ir = 0; ir < table.log_scales.size(); ++ir) {
            const double lr = table.log_scales[ir];
            const double lv = table.log_value(iq, ir);
            const double r = std::exp(lr);
            const double v = std::exp(lv);
            std::string flag(to_string(table.flags[table.index(iq, ir)]));
            std::string r_text;
            std::string v_text;
            const bool r_ok = std::isnormal(r);
            const bool v_ok = std::isnormal(v);
            if (r_ok && v_ok) {
                r_text = format_double(r);
                v_text = counts ? std::to_string(std::llround(v)) : format_double(v);
            } else {
                r_text = format_double(lr);
                v_text = format_double(lv);
                flag += "_log";
            }
            out << to_string(table.kind) << ',' << format_double(table.q_grid[iq]) << ',' << r_text << ','
                << v_text << ',' << flag << '\n';
        }
    }
}

}  // namespace hsmf
