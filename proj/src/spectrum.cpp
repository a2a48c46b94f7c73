#include "hsmf/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "hsmf/counting.hpp"
#include "hsmf/numeric.hpp"

namespace hsmf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

// ------------------------------------------------------------- Legendre

LegendreResult legendre_transform(std::span<const double> q_grid, std::span<const double> phi,
                                  std::span<const double> alpha_grid) {
    if (q_grid.size() < 2 || q_grid.size() != phi.size()) {
        throw Error(ErrorCode::InvalidArgument, "Legendre transform needs >= 2 matching samples");
    }
    const std::size_t n = q_grid.size();
    LegendreResult out;
    out.alpha.assign(alpha_grid.begin(), alpha_grid.end());
    for (double a : alpha_grid) {
        double best = kInf;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = a * q_grid[i] + phi[i];
            if (v < best) {
                best = v;
                arg = i;
            }
        }
        bool boundary = false;
        if (arg == 0 || arg == n - 1) {
            boundary = true;
            const double tol = 1e-12 * (1.0 + std::abs(best));
            for (std::size_t i = 1; i + 1 < n; ++i) {
                if (a * q_grid[i] + phi[i] <= best + tol) {
                    boundary = false;
                    break;
                }
            }
        }
        out.value.push_back(best);
        out.argmin.push_back(arg);
        out.boundary.push_back(boundary ? 1 : 0);
    }
    return out;
}

AlphaBounds alpha_bounds(std::span<const double> q_grid, std::span<const double> b, std::span<const double> B) {
    if (q_grid.size() != b.size() || q_grid.size() != B.size()) {
        throw Error(ErrorCode::InvalidArgument, "grid and curves differ in length");
    }
    AlphaBounds out{-kInf, kInf, -kInf, kInf};
    bool pos = false;
    bool neg = false;
    for (std::size_t i = 0; i < q_grid.size(); ++i) {
        const double q = q_grid[i];
        if (std::abs(q) <= 1e-12) continue;
        if (q > 0.0) {
            pos = true;
            out.alpha_min = std::max(out.alpha_min, -b[i] / q);
            out.beta_min = std::max(out.beta_min, -B[i] / q);
        } else {
            neg = true;
            out.alpha_max = std::min(out.alpha_max, -b[i] / q);
            out.beta_max = std::min(out.beta_max, -B[i] / q);
        }
    }
    if (!pos || !neg) throw Error(ErrorCode::DegenerateGrid, "q grid needs values of both signs away from 0");
    return out;
}

AlphaBounds alpha_bounds(const SeparatorGrid& grid) { return alpha_bounds(grid.q_grid, grid.b, grid.B); }

// ------------------------------------------------------------- coarse spectrum

namespace {

struct Composition {
    double log_mass;
    double multiplicity;
};

// All child-index compositions of n generations of one family.
std::vector<Composition> compositions(std::span<const double> log_probs, std::int64_t n) {
    std::vector<Composition> out;
    const std::size_t a = log_probs.size();
    std::vector<std::int64_t> m(a, 0);
    // Recursive fill of m[i..] with the remaining generations.
    auto rec = [&](auto&& self, std::size_t i, std::int64_t remaining, double log_mass, double mult) -> void {
        if (i + 1 == a) {
            out.push_back({log_mass + static_cast<double>(remaining) * log_probs[i], mult});
            return;
        }
        double binom = 1.0;  // C(remaining, j)
        for (std::int64_t j = 0; j <= remaining; ++j) {
            self(self, i + 1, remaining - j, log_mass + static_cast<double>(j) * log_probs[i], mult * binom);
            binom = binom * static_cast<double>(remaining - j) / static_cast<double>(j + 1);
        }
    };
    rec(rec, 0, n, 0.0, 1.0);
    return out;
}

bool in_bin(double alpha_hat, double alpha, double epsilon) {
    return std::abs(alpha_hat - alpha) <= epsilon + 1e-12;
}

void exact_bins(const MoranMeasure& measure, std::int64_t k, double log_r, double epsilon,
                std::span<const double> alpha_grid, std::span<CoarseBin> bins) {
    const auto counts = measure.schedule().family_counts(k, measure.family_count());
    std::vector<Composition> cells{{0.0, 1.0}};
    for (std::size_t f = 0; f < counts.size(); ++f) {
        if (counts[f] == 0) continue;
        const auto part = compositions(measure.log_probs(f), counts[f]);
        std::vector<Composition> next;
        next.reserve(cells.size() * part.size());
        for (const auto& c : cells) {
            for (const auto& p : part) next.push_back({c.log_mass + p.log_mass, c.multiplicity * p.multiplicity});
        }
        cells = std::move(next);
    }
    for (std::size_t ia = 0; ia < alpha_grid.size(); ++ia) {
        double count = 0.0;
        for (const auto& c : cells) {
            if (in_bin(c.log_mass / log_r, alpha_grid[ia], epsilon)) count += c.multiplicity;
        }
        CoarseBin& bin = bins[ia];
        bin.count = count;
        bin.empty = count == 0.0;
        bin.log_count = bin.empty ? -kInf : std::log(count);
    }
}

struct FamilyTilt {
    std::vector<double> log_w;
    std::vector<double> w;
};

FamilyTilt family_tilt(const MoranMeasure& measure, std::size_t f, double q) {
    FamilyTilt out;
    out.w = tilt_probabilities(measure, f, q, 0.0);
    const auto lp = measure.log_probs(f);
    std::vector<double> terms(lp.size());
    for (std::size_t i = 0; i < lp.size(); ++i) terms[i] = q * lp[i];
    const double norm = log_sum_exp(terms);
    for (double v : terms) out.log_w.push_back(v - norm);
    return out;
}

// E[log mass] of a depth-k path under the q tilt; non-decreasing in q.
double tilted_log_mass(const MoranMeasure& measure, std::span<const std::int64_t> counts, double q) {
    double acc = 0.0;
    for (std::size_t f = 0; f < counts.size(); ++f) {
        if (counts[f] == 0) continue;
        const auto w = tilt_probabilities(measure, f, q, 0.0);
        const auto lp = measure.log_probs(f);
        double e = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) e += w[i] * lp[i];
        acc += static_cast<double>(counts[f]) * e;
    }
    return acc;
}

double plan_tilt(const MoranMeasure& measure, std::span<const std::int64_t> counts, double target_log_mass) {
    double lo = -256.0;
    double hi = 256.0;
    if (tilted_log_mass(measure, counts, lo) >= target_log_mass) return lo;
    if (tilted_log_mass(measure, counts, hi) <= target_log_mass) return hi;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (tilted_log_mass(measure, counts, mid) < target_log_mass) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

void sampled_bin(const MoranMeasure& measure, std::span<const std::int64_t> counts, double log_r, double epsilon,
                 double alpha, std::size_t sample_count, std::uint64_t seed, CoarseBin& bin) {
    const double q = plan_tilt(measure, counts, alpha * log_r);
    std::vector<std::size_t> fams;
    std::vector<FamilyTilt> tilts;
    for (std::size_t f = 0; f < counts.size(); ++f) {
        if (counts[f] == 0) continue;
        fams.push_back(f);
        tilts.push_back(family_tilt(measure, f, q));
    }
    Rng rng(seed);
    std::vector<double> hits;  // -log P(path) for draws inside the bin
    for (std::size_t s = 0; s < sample_count; ++s) {
        double log_mass = 0.0;
        double log_path = 0.0;
        for (std::size_t j = 0; j < fams.size(); ++j) {
            const auto lp = measure.log_probs(fams[j]);
            const auto& tilt = tilts[j];
            std::int64_t remaining = counts[fams[j]];
            double rest = 1.0;
            for (std::size_t i = 0; i < lp.size(); ++i) {
                std::int64_t m = remaining;
                if (i + 1 < lp.size() && remaining > 0) {
                    const double p = std::clamp(tilt.w[i] / rest, 0.0, 1.0);
                    std::binomial_distribution<std::int64_t> draw(remaining, p);
                    m = draw(rng.engine());
                }
                remaining -= m;
                rest -= tilt.w[i];
                log_mass += static_cast<double>(m) * lp[i];
                if (m > 0) log_path += static_cast<double>(m) * tilt.log_w[i];
            }
        }
        if (in_bin(log_mass / log_r, alpha, epsilon)) hits.push_back(-log_path);
    }
    if (hits.empty()) {
        bin.empty = true;
        bin.count = 0.0;
        bin.log_count = -kInf;
        return;
    }
    const double n = static_cast<double>(sample_count);
    const double top = *std::max_element(hits.begin(), hits.end());
    double s1 = 0.0;
    double s2 = 0.0;
    for (double h : hits) {
        const double w = std::exp(h - top);
        s1 += w;
        s2 += w * w;
    }
    bin.empty = false;
    bin.log_count = top + std::log(s1 / n);
    bin.count = std::exp(bin.log_count);
    // Relative variance of the mean estimator.
    const double rel_var = std::max(0.0, (s2 * n / (s1 * s1) - 1.0) / n);
    bin.f_hat_stderr = std::sqrt(rel_var) / -log_r;
}

}  // namespace

CoarseSpectrum coarse_spectrum_log(const MoranMeasure& measure, std::span<const double> log_r_list, double epsilon,
                                   std::span<const double> alpha_grid, const CoarseOptions& options) {
    if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
    CoarseSpectrum out;
    out.epsilon = epsilon;
    out.log_r_list.assign(log_r_list.begin(), log_r_list.end());
    out.alpha_grid.assign(alpha_grid.begin(), alpha_grid.end());
    out.bins.resize(log_r_list.size() * alpha_grid.size());
    for (std::size_t ir = 0; ir < log_r_list.size(); ++ir) {
        const double log_r = log_r_list[ir];
        if (!(log_r < 0.0) || !std::isfinite(log_r)) {
            throw Error(ErrorCode::InvalidArgument, "coarse spectrum needs r in (0, 1)");
        }
        const std::int64_t k = measure.matched_generation_log(log_r);
        const std::span<CoarseBin> row(out.bins.data() + ir * alpha_grid.size(), alpha_grid.size());
        for (std::size_t ia = 0; ia < alpha_grid.size(); ++ia) {
            row[ia].log_r = log_r;
            row[ia].r = std::exp(log_r);
            row[ia].alpha = alpha_grid[ia];
            row[ia].generation = k;
            row[ia].sampled = k > options.exact_generation_limit;
        }
        if (k <= options.exact_generation_limit) {
            exact_bins(measure, k, log_r, epsilon, alpha_grid, row);
        } else {
            const auto counts = measure.schedule().family_counts(k, measure.family_count());
            for (std::size_t ia = 0; ia < alpha_grid.size(); ++ia) {
                sampled_bin(measure, counts, log_r, epsilon, alpha_grid[ia], options.sample_count,
                            derive_seed(options.seed, ir * alpha_grid.size() + ia), row[ia]);
            }
        }
        for (CoarseBin& bin : row) bin.f_hat = bin.empty ? -kInf : bin.log_count / -log_r;
    }
    return out;
}

CoarseSpectrum coarse_spectrum(const MoranMeasure& measure, std::span<const double> r_list, double epsilon,
                               std::span<const double> alpha_grid, const CoarseOptions& options) {
    std::vector<double> logs;
    for (double r : r_list) {
        if (!(r > 0.0 && r < 1.0)) throw Error(ErrorCode::InvalidArgument, "coarse spectrum needs r in (0, 1)");
        logs.push_back(std::log(r));
    }
    CoarseSpectrum out = coarse_spectrum_log(measure, logs, epsilon, alpha_grid, options);
    for (std::size_t i = 0; i < out.bins.size(); ++i) out.bins[i].r = r_list[i / alpha_grid.size()];
    return out;
}

// ------------------------------------------------------------- tilted sampling

double tilted_exponent(const MoranMeasure& measure, double q, double t, std::int64_t depth) {
    if (depth < 1 || depth > measure.depth_cap()) throw Error(ErrorCode::InvalidArgument, "depth outside [1, cap]");
    const auto counts = measure.schedule().family_counts(depth, measure.family_count());
    double num = 0.0;
    double den = 0.0;
    for (std::size_t f = 0; f < counts.size(); ++f) {
        if (counts[f] == 0) continue;
        const auto w = tilt_probabilities(measure, f, q, t);
        const auto lp = measure.log_probs(f);
        const auto lc = measure.log_ratios(f);
        double ep = 0.0;
        double ec = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            ep += w[i] * lp[i];
            ec += w[i] * lc[i];
        }
        num += static_cast<double>(counts[f]) * ep;
        den += static_cast<double>(counts[f]) * ec;
    }
    return num / den;
}

TiltedCheck tilted_dimension_check(const MoranMeasure& measure, double q, double t, std::int64_t depth,
                                   std::size_t sample_count, std::uint64_t seed) {
    if (depth < 1 || depth > measure.depth_cap()) throw Error(ErrorCode::InvalidArgument, "depth outside [1, cap]");
    if (sample_count == 0) throw Error(ErrorCode::InvalidArgument, "sample_count must be positive");
    TiltedCheck out;
    out.q = q;
    out.t = t;
    out.depth = depth;
    out.sample_count = sample_count;

    constexpr double h = 1e-3;
    SampledCurve curve;
    for (double x : {q - h, q, q + h}) {
        curve.x.push_back(x);
        curve.y.push_back(solve_beta_k(measure, x, depth));
    }
    out.alpha_hat_pred = -numeric_derivative(curve, q);
    out.legendre_value = q * out.alpha_hat_pred + t;

    const TiltedSampler sampler(measure, q, t);
    Rng rng(seed);
    std::vector<double> alphas(sample_count);
    for (double& a : alphas) {
        const PathDraw d = sampler.draw(depth, rng);
        a = d.log_mass / d.log_length;
    }
    double sum = 0.0;
    for (double a : alphas) sum += a;
    out.alpha_emp_mean = sum / static_cast<double>(sample_count);
    if (sample_count > 1) {
        double ss = 0.0;
        for (double a : alphas) ss += (a - out.alpha_emp_mean) * (a - out.alpha_emp_mean);
        out.alpha_emp_sd = std::sqrt(ss / static_cast<double>(sample_count - 1));
    }
    return out;
}

// ------------------------------------------------------------- export

void write_legendre_csv(std::ostream& out, const SpectrumResult& result) {
    out << "alpha,b_star,B_star,boundary_flag\n";
    for (std::size_t i = 0; i < result.alpha_grid.size(); ++i) {
        const bool flag = result.b_star.boundary[i] != 0 || result.B_star.boundary[i] != 0;
        out << format_double(result.alpha_grid[i]) << ',' << format_double(result.b_star.value[i]) << ','
            << format_double(result.B_star.value[i]) << ',' << (flag ? 1 : 0) << '\n';
    }
}

void write_coarse_csv(std::ostream& out, const CoarseSpectrum& coarse) {
    out << "r,alpha,f_hat,count,f_hat_stderr\n";
    auto value_or_exp = [](double v, double log_v) {
        return std::isnormal(v) ? format_double(v) : "exp(" + format_double(log_v) + ")";
    };
    for (const CoarseBin& bin : coarse.bins) {
        out << value_or_exp(bin.r, bin.log_r) << ',' << format_double(bin.alpha) << ',';
        if (bin.empty) {
            out << "empty,0,0\n";
            continue;
        }
        out << format_double(bin.f_hat) << ',' << value_or_exp(bin.count, bin.log_count) << ','
            << format_double(bin.f_hat_stderr) << '\n';
    }
}

}  // namespace hsmf
