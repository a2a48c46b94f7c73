#include "hsmf/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "hsmf/numeric.hpp"

namespace hsmf {

namespace {

BetaEquation make_equation(const MoranMeasure& measure, double q, std::span<const std::int64_t> counts) {
    BetaEquation eq;
    for (std::size_t f = 0; f < counts.size(); ++f) {
        if (counts[f] == 0) continue;
        eq.counts.push_back(static_cast<double>(counts[f]));
        std::vector<double> lp(measure.log_probs(f).begin(), measure.log_probs(f).end());
        for (double& v : lp) v *= q;
        eq.log_probs.push_back(std::move(lp));
        eq.log_ratios.emplace_back(measure.log_ratios(f).begin(), measure.log_ratios(f).end());
    }
    return eq;
}

bool in_use_constant(const MoranMeasure& measure, std::span<const std::int64_t> counts) {
    for (std::size_t f = 0; f < counts.size(); ++f) {
        if (counts[f] != 0 && !measure.has_constant_ratio(f)) return false;
    }
    return true;
}

// sum_f n_f log sum_j p_j^q over sum_f n_f (-log c_f).
double closed_form_beta(std::span<const double> numer, std::span<const double> denom,
                        std::span<const std::int64_t> counts) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t f = 0; f < counts.size(); ++f) {
        if (counts[f] == 0) continue;
        num += static_cast<double>(counts[f]) * numer[f];
        den += static_cast<double>(counts[f]) * denom[f];
    }
    return num / den;
}

double root_near(const BetaEquation& eq, double guess, double half_width) {
    constexpr double kLimit = 0x1.0p40;
    double lo = guess - half_width;
    double hi = guess + half_width;
    double step = half_width;
    while (eq.value(lo) < 0.0) {
        step *= 2.0;
        lo = guess - step;
        if (step > kLimit) throw Error(ErrorCode::NoBracket, "no lower bracket for beta");
    }
    step = half_width;
    while (eq.value(hi) > 0.0) {
        step *= 2.0;
        hi = guess + step;
        if (step > kLimit) throw Error(ErrorCode::NoBracket, "no upper bracket for beta");
    }
    double x = std::clamp(guess, lo, hi);
    for (int iter = 0; iter < 400; ++iter) {
        double slope = 0.0;
        const double f = eq.value_and_slope(x, slope);
        if (f == 0.0) return x;
        if (f > 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        double next = x - f / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x)) || !(hi - lo > 0.0)) return next;
        x = next;
    }
    return x;
}

}  // namespace

double BetaEquation::value(double beta) const {
    double slope = 0.0;
    return value_and_slope(beta, slope);
}

double BetaEquation::value_and_slope(double beta, double& slope) const {
    double total = 0.0;
    slope = 0.0;
    std::vector<double> terms;
    for (std::size_t f = 0; f < counts.size(); ++f) {
        const auto& lp = log_probs[f];
        const auto& lc = log_ratios[f];
        terms.resize(lp.size());
        for (std::size_t i = 0; i < lp.size(); ++i) terms[i] = lp[i] + beta * lc[i];
        const double lse = log_sum_exp(terms);
        double d = 0.0;
        for (std::size_t i = 0; i < lp.size(); ++i) d += std::exp(terms[i] - lse) * lc[i];
        total += counts[f] * lse;
        slope += counts[f] * d;
    }
    return total;
}

double solve_beta_k(const MoranMeasure& measure, double q, std::int64_t k, BetaMethod method) {
    if (k < 1 || k > measure.depth_cap()) throw Error(ErrorCode::InvalidArgument, "k outside [1, depth_cap]");
    const auto counts = measure.schedule().family_counts(k, measure.family_count());
    const bool constant = in_use_constant(measure, counts);
    if (method == BetaMethod::ClosedForm && !constant) {
        throw Error(ErrorCode::InvalidArgument, "closed form needs constant ratios within each family");
    }
    if (method == BetaMethod::ClosedForm || (method == BetaMethod::Auto && constant)) {
        std::vector<double> numer(counts.size()), denom(counts.size());
        for (std::size_t f = 0; f < counts.size(); ++f) {
            numer[f] = family_log_partition(measure, f, q, 0.0);
            denom[f] = -measure.log_ratios(f)[0];
        }
        return closed_form_beta(numer, denom, counts);
    }
    return root_near(make_equation(measure, q, counts), 0.0, 64.0);
}

TailWindow tail_window(std::int64_t k_max) {
    if (k_max < 1) throw Error(ErrorCode::InvalidArgument, "k_max must be positive");
    auto first = static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(k_max))));
    while (first > 1 && (first - 1) * (first - 1) >= k_max) --first;
    while (first * first < k_max) ++first;
    return {first, k_max};
}

BetaSequence beta_sequence(const MoranMeasure& measure, double q, std::int64_t k_max, std::int64_t stride) {
    if (k_max < 1 || k_max > measure.depth_cap()) {
        throw Error(ErrorCode::InvalidArgument, "k_max outside [1, depth_cap]");
    }
    if (stride < 0) throw Error(ErrorCode::InvalidArgument, "stride must be non-negative");
    BetaSequence seq;
    seq.q = q;
    seq.stride = stride == 0 ? measure.schedule().natural_stride() : stride;
    if (seq.stride > k_max) seq.stride = k_max;

    const std::size_t nf = measure.family_count();
    std::vector<double> numer(nf), denom(nf);
    for (std::size_t f = 0; f < nf; ++f) {
        numer[f] = family_log_partition(measure, f, q, 0.0);
        denom[f] = -measure.log_ratios(f)[0];
    }

    std::vector<std::int64_t> counts(nf, 0);
    std::int64_t next = seq.stride;
    double guess = 0.0;
    const auto emit = [&] {
        double beta = 0.0;
        if (in_use_constant(measure, counts)) {
            beta = closed_form_beta(numer, denom, counts);
        } else {
            beta = root_near(make_equation(measure, q, counts), guess, 1.0);
        }
        guess = beta;
        seq.k_samples.push_back(next);
        seq.beta_values.push_back(beta);
        next += seq.stride;
    };
    measure.schedule().for_each_run(k_max, [&](std::size_t f, std::int64_t first, std::int64_t len) {
        const std::int64_t before = counts[f];
        const std::int64_t end = first + len - 1;
        while (next <= end) {
            counts[f] = before + (next - first + 1);
            emit();
        }
        counts[f] = before + len;
    });

    seq.window = tail_window(k_max);
    std::size_t lo = static_cast<std::size_t>(
        std::lower_bound(seq.k_samples.begin(), seq.k_samples.end(), seq.window.first) - seq.k_samples.begin());
    const std::size_t n = seq.k_samples.size();
    if (n - lo < 2) lo = n >= 2 ? n - 2 : 0;
    seq.window.first = seq.k_samples[lo];
    seq.liminf_est = std::numeric_limits<double>::infinity();
    seq.limsup_est = -std::numeric_limits<double>::infinity();
    for (std::size_t i = lo; i < n; ++i) {
        seq.liminf_est = std::min(seq.liminf_est, seq.beta_values[i]);
        seq.limsup_est = std::max(seq.limsup_est, seq.beta_values[i]);
    }
    return seq;
}

ThetaDelta theta_delta_from_moments(const MomentTable& table, double q) {
    std::size_t iq = table.q_grid.size();
    for (std::size_t i = 0; i < table.q_grid.size(); ++i) {
        if (table.q_grid[i] == q) iq = i;
    }
    if (iq == table.q_grid.size()) throw Error(ErrorCode::InvalidArgument, "q is not on the table grid");

    // Rows with r < 1 only; -log r is the natural abscissa.
    std::vector<std::size_t> rows;
    for (std::size_t ir = 0; ir < table.log_scales.size(); ++ir) {
        if (table.log_scales[ir] < 0.0) rows.push_back(ir);
    }
    if (rows.size() < 8) throw Error(ErrorCode::InsufficientScales, "need at least 8 scales below 1");
    const double coarse = -table.log_scales[rows.front()];
    const double fine = -table.log_scales[rows.back()];
    if (fine - coarse < 4.0 * std::log(2.0) * (1.0 - 1e-12)) {
        throw Error(ErrorCode::InsufficientScales, "scales must span at least 4 octaves");
    }
    const double cut = 0.5 * (std::log(coarse) + std::log(fine));
    std::size_t start = 0;
    while (start < rows.size() && std::log(-table.log_scales[rows[start]]) < cut) ++start;
    start = std::min(start, rows.size() - 2);

    ThetaDelta out;
    out.first_row = rows[start];
    out.rows = rows.size() - start;
    out.theta = std::numeric_limits<double>::infinity();
    out.delta = -std::numeric_limits<double>::infinity();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t j = start; j < rows.size(); ++j) {
        const double x = -table.log_scales[rows[j]];
        const double y = table.log_value(iq, rows[j]);
        const double ratio = y / x;
        out.theta = std::min(out.theta, ratio);
        out.delta = std::max(out.delta, ratio);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(out.rows);
    const double det = n * sxx - sx * sx;
    out.slope = det != 0.0 ? (n * sxy - sx * sy) / det : 0.0;
    return out;
}

std::vector<double> default_log_radii(const MoranMeasure& measure, std::int64_t k_max, std::size_t samples) {
    if (k_max < 1 || k_max > measure.depth_cap()) {
        throw Error(ErrorCode::InvalidArgument, "k_max outside [1, depth_cap]");
    }
    std::vector<std::int64_t> ks;
    const double span = std::log(static_cast<double>(k_max));
    for (std::size_t i = 0; i < samples; ++i) {
        const double u = samples > 1 ? static_cast<double>(i) / static_cast<double>(samples - 1) : 1.0;
        ks.push_back(std::clamp<std::int64_t>(std::llround(std::exp(u * span)), 1, k_max));
    }
    // Block boundaries carry the extremes of the moment ratios.
    for (std::int64_t t : measure.schedule().boundaries()) {
        for (std::int64_t k : {t - 1, t}) {
            if (k >= 1 && k <= k_max) ks.push_back(k);
        }
    }
    ks.push_back(k_max);
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    std::vector<double> out;
    out.reserve(ks.size());
    for (std::int64_t k : ks) out.push_back(measure.log_max_length(k));
    return out;
}

SeparatorGrid separator_grid(const MoranMeasure& measure, std::span<const double> q_grid, std::int64_t k_max,
                             std::span<const double> log_radii) {
    if (q_grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty q grid");
    SeparatorGrid grid;
    grid.q_grid.assign(q_grid.begin(), q_grid.end());

    std::vector<double> radii(log_radii.begin(), log_radii.end());
    if (radii.empty()) radii = default_log_radii(measure, k_max);
    const MomentTable table = partition_moment_table(measure, q_grid, radii);

    for (double q : q_grid) {
        const BetaSequence seq = beta_sequence(measure, q, k_max);
        const ThetaDelta td = theta_delta_from_moments(table, q);
        grid.b.push_back(seq.liminf_est);
        grid.B.push_back(seq.limsup_est);
        grid.Lambda.push_back(seq.limsup_est);
        grid.Theta.push_back(td.theta);
        grid.Delta.push_back(td.delta);
        SeparatorDiagnostics diag;
        diag.window = seq.window;
        diag.stride = seq.stride;
        diag.oscillation = seq.oscillation();
        diag.converged = diag.oscillation <= kConvergenceTolerance;
        diag.theta_slope = td.slope;
        grid.diagnostics.push_back(diag);
    }
    return grid;
}

// ------------------------------------------------------------- invariants

namespace {

void check_monotone(std::span<const double> q, std::span<const double> v, const std::string& name, double slack,
                    InvariantReport& rep) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (q[i] > q[i - 1] && v[i] > v[i - 1] + slack) {
            rep.failures.push_back(name + " increases between q=" + format_double(q[i - 1]) + " and q=" +
                                   format_double(q[i]));
        }
    }
}

void check_convex(std::span<const double> q, std::span<const double> v, const std::string& name, double slack,
                  InvariantReport& rep) {
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        const double w = (q[i] - q[i - 1]) / (q[i + 1] - q[i - 1]);
        const double chord = v[i - 1] + w * (v[i + 1] - v[i - 1]);
        if (v[i] > chord + slack) rep.failures.push_back(name + " not convex at q=" + format_double(q[i]));
    }
}

void check_zero_at_one(std::span<const double> q, std::span<const double> v, const std::string& name,
                       double zero_slack, InvariantReport& rep) {
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] == 1.0 && std::abs(v[i]) > zero_slack) {
            rep.failures.push_back(name + "(1) = " + format_double(v[i]) + " is not 0");
        }
    }
}

}  // namespace

InvariantReport check_separator_invariants(const SeparatorGrid& grid, double slack, double zero_slack) {
    InvariantReport rep;
    const std::span<const double> q = grid.q_grid;
    check_monotone(q, grid.b, "b", slack, rep);
    check_monotone(q, grid.B, "B", slack, rep);
    check_monotone(q, grid.Lambda, "Lambda", slack, rep);
    check_convex(q, grid.B, "B", slack, rep);
    check_convex(q, grid.Lambda, "Lambda", slack, rep);
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (grid.b[i] > grid.B[i] + slack || grid.B[i] > grid.Lambda[i] + slack) {
            rep.failures.push_back("b <= B <= Lambda fails at q=" + format_double(q[i]));
        }
    }
    check_zero_at_one(q, grid.b, "b", zero_slack, rep);
    check_zero_at_one(q, grid.Lambda, "Lambda", zero_slack, rep);
    return rep;
}

InvariantReport check_curve_invariants(std::span<const double> q_grid, std::span<const double> values,
                                       const std::string& name, double slack, double zero_slack) {
    InvariantReport rep;
    check_monotone(q_grid, values, name, slack, rep);
    check_convex(q_grid, values, name, slack, rep);
    check_zero_at_one(q_grid, values, name, zero_slack, rep);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) rep.failures.push_back(name + " not finite at q=" + format_double(q_grid[i]));
    }
    return rep;
}

void write_separator_csv(std::ostream& out, const SeparatorGrid& grid) {
    out << "q,b,B,Lambda,Theta,Delta,osc,converged\n";
    for (std::size_t i = 0; i < grid.q_grid.size(); ++i) {
        out << format_double(grid.q_grid[i]) << ',' << format_double(grid.b[i]) << ',' << format_double(grid.B[i])
            << ',' << format_double(grid.Lambda[i]) << ',' << format_double(grid.Theta[i]) << ','
            << format_double(grid.Delta[i]) << ',' << format_double(grid.diagnostics[i].oscillation) << ','
            << (grid.diagnostics[i].converged ? "true" : "false") << '\n';
    }
}

// ------------------------------------------------------------- derivatives

double numeric_derivative(const SampledCurve& curve, double q) {
    const auto& x = curve.x;
    const auto& y = curve.y;
    if (x.size() < 2 || x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "curve needs >= 2 samples");
    std::size_t i = x.size();
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (std::abs(x[j] - q) <= 1e-12 * std::max(1.0, std::abs(q))) i = j;
    }
    if (i == x.size()) throw Error(ErrorCode::InvalidArgument, "q is not a grid node");
    const std::size_t n = x.size();
    if (i > 0 && i + 1 < n) return (y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]);
    if (n == 2) return (y[1] - y[0]) / (x[1] - x[0]);
    // Derivative of the quadratic through the three nodes nearest the end.
    const std::size_t a = i == 0 ? 0 : n - 3;
    const double x0 = x[a], x1 = x[a + 1], x2 = x[a + 2];
    const double t = x[i];
    return y[a] * ((t - x1) + (t - x2)) / ((x0 - x1) * (x0 - x2)) +
           y[a + 1] * ((t - x0) + (t - x2)) / ((x1 - x0) * (x1 - x2)) +
           y[a + 2] * ((t - x0) + (t - x1)) / ((x2 - x0) * (x2 - x1));
}

}  // namespace hsmf
