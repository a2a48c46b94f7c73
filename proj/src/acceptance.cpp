#include "hsmf/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "hsmf/catalog.hpp"
#include "hsmf/counting.hpp"
#include "hsmf/numeric.hpp"
#include "hsmf/oracles.hpp"
#include "hsmf/scaling.hpp"
#include "hsmf/spec_io.hpp"
#include "hsmf/spectrum.hpp"
#include "json.hpp"

namespace hsmf::acceptance {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const std::vector<double> kExampleQs{-2.0, -1.0, 0.25, 0.5, 0.75, 2.0};

std::vector<double> grid(double lo, double hi, double step) {
    std::vector<double> out;
    const auto n = static_cast<std::int64_t>(std::llround((hi - lo) / step));
    for (std::int64_t i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

struct Recorder {
    CriterionResult& res;

    void value(const std::string& key, double v) { res.measured.emplace_back(key, v); }
    void note(const std::string& text) { res.notes.push_back(text); }
    // Records the measurement and folds the comparison into the pass flag.
    bool at_most(const std::string& key, double v, double limit) {
        value(key, v);
        const bool ok = v <= limit;
        if (!ok) note(key + " = " + format_double(v) + " exceeds " + format_double(limit));
        res.pass = res.pass && ok;
        return ok;
    }
    bool require(bool ok, const std::string& what) {
        if (!ok) note(what);
        res.pass = res.pass && ok;
        return ok;
    }
};

std::string q_key(const std::string& prefix, double q) { return prefix + "[q=" + format_double(q) + "]"; }

// ------------------------------------------------------------- 1

void normalization_root(const Fixtures&, const Options& opt, Recorder& rec) {
    Rng rng(derive_seed(opt.seed, 1));
    double worst_beta_one = 0.0;
    double worst_residual_ratio = 0.0;  // |log S_k(q, beta_k)| / (1e-12 k)
    for (int s = 0; s < 200; ++s) {
        const MoranMeasure m(random_spec(rng));
        const auto k = static_cast<std::int64_t>(1 + rng.next() % static_cast<std::uint64_t>(m.depth_cap()));
        for (int q = -3; q <= 3; ++q) {
            const double beta = solve_beta_k(m, q, k);
            const double residual = std::abs(log_partition_moment(m, q, beta, k));
            worst_residual_ratio = std::max(worst_residual_ratio, residual / (1e-12 * static_cast<double>(k)));
            if (q == 1) worst_beta_one = std::max(worst_beta_one, std::abs(beta));
        }
    }
    rec.at_most("max_abs_beta_k_at_q1", worst_beta_one, 1e-12 * opt.tolerance_scale);
    rec.at_most("max_residual_over_bound", worst_residual_ratio, opt.tolerance_scale);
}

// ------------------------------------------------------------- 2

void uniform_oracle(const Fixtures& fx, const Options& opt, Recorder& rec) {
    const MoranMeasure m(fx.uniform);
    const auto qs = grid(-5.0, 5.0, 0.25);
    const SeparatorGrid g = separator_grid(m, qs, std::min<std::int64_t>(m.depth_cap(), 60));
    double worst = 0.0;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        const double want = oracles::uniform_beta(qs[i]);
        worst = std::max({worst, std::abs(g.b[i] - want), std::abs(g.B[i] - want), std::abs(g.Lambda[i] - want)});
    }
    rec.at_most("max_abs_error", worst, 1e-9 * opt.tolerance_scale);
}

// ------------------------------------------------------------- 3

void periodic_oracle(const Fixtures& fx, const Options& opt, Recorder& rec) {
    const MoranMeasure m(fx.periodic);
    const auto qs = grid(-5.0, 5.0, 0.25);
    const SeparatorGrid g = separator_grid(m, qs, 1000);
    const auto& a = m.family(0);
    const auto& b = m.family(1);
    double worst = 0.0;
    double worst_gap = 0.0;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        const double want = oracles::periodic_moran_beta(a.probs, a.ratios[0], b.probs, b.ratios[0], qs[i]);
        worst = std::max({worst, std::abs(g.b[i] - want), std::abs(g.B[i] - want), std::abs(g.Lambda[i] - want)});
        worst_gap = std::max(worst_gap, g.B[i] - g.b[i]);
    }
    rec.value("beta_at_q0", g.b[20]);
    rec.at_most("max_abs_error", worst, 1e-6 * opt.tolerance_scale);
    rec.at_most("max_B_minus_b", worst_gap, 1e-6 * opt.tolerance_scale);
}

// ------------------------------------------------------------- 4

void block_bounds(const Fixtures& fx, const Options& opt, Recorder& rec) {
    const MoranMeasure m(fx.block);
    const std::int64_t k_max = std::min<std::int64_t>(m.depth_cap(), std::int64_t{1} << 20);
    const auto& c = m.family(0);
    const auto& d = m.family(1);
    double b_half = 0.0;
    double B_half = 0.0;
    for (double q : kExampleQs) {
        const BetaSequence seq = beta_sequence(m, q, k_max);
        const auto want = oracles::block_moran_bounds(c.probs, c.ratios[0], d.probs, d.ratios[0], q);
        rec.value(q_key("liminf_est", q), seq.liminf_est);
        rec.value(q_key("liminf_oracle", q), want.liminf);
        rec.value(q_key("limsup_est", q), seq.limsup_est);
        rec.value(q_key("limsup_oracle", q), want.limsup);
        rec.at_most(q_key("liminf_error", q), std::abs(seq.liminf_est - want.liminf), 0.02 * opt.tolerance_scale);
        rec.at_most(q_key("limsup_error", q), std::abs(seq.limsup_est - want.limsup), 0.02 * opt.tolerance_scale);
        if (q == 0.5) {
            b_half = seq.liminf_est;
            B_half = seq.limsup_est;
        }
    }
    rec.require(b_half < B_half, "no strict gap b < B at q = 0.5");
    rec.value("max_boundary_ratio", m.schedule().max_boundary_ratio());
}

// ------------------------------------------------------------- 5

void switching_binomial(const Fixtures& fx, const Options& opt, Recorder& rec) {
    const MoranMeasure m(fx.switching);
    const std::int64_t k_max = m.depth_cap();
    const double p = m.family(1).probs[0];
    const double p_hat = m.family(0).probs[0];
    for (double q : kExampleQs) {
        const BetaSequence seq = beta_sequence(m, q, k_max);
        const auto tau = oracles::switching_binomial_tau(p, p_hat, q);
        const double lo = std::min(tau.tau, tau.tau_hat);
        const double hi = std::max(tau.tau, tau.tau_hat);
        rec.value(q_key("liminf_est", q), seq.liminf_est);
        rec.value(q_key("limsup_est", q), seq.limsup_est);
        rec.at_most(q_key("liminf_error", q), std::abs(seq.liminf_est - lo), 0.02 * opt.tolerance_scale);
        rec.at_most(q_key("limsup_error", q), std::abs(seq.limsup_est - hi), 0.02 * opt.tolerance_scale);
    }
    std::vector<double> wide;
    for (double q : grid(-20.0, 20.0, 0.5)) {
        if (q != 0.0) wide.push_back(q);
    }
    std::vector<double> b, B;
    for (double q : wide) {
        const BetaSequence seq = beta_sequence(m, q, k_max);
        b.push_back(seq.liminf_est);
        B.push_back(seq.limsup_est);
    }
    const AlphaBounds ab = alpha_bounds(wide, b, B);
    const auto want = oracles::switching_alpha_interval(p_hat);
    rec.value("alpha_min", ab.alpha_min);
    rec.value("alpha_max", ab.alpha_max);
    rec.at_most("alpha_min_error", std::abs(ab.alpha_min - want.lo), 0.02 * opt.tolerance_scale);
    rec.at_most("alpha_max_error", std::abs(ab.alpha_max - want.hi), 0.02 * opt.tolerance_scale);
}

// ------------------------------------------------------------- 6

void structural(const Fixtures& fx, const Options& opt, Recorder& rec) {
    const double slack = 1e-8 * opt.tolerance_scale;
    const double zero = 1e-9 * opt.tolerance_scale;
    std::size_t checked = 0;
    auto check = [&](const std::string& name, const SeparatorGrid& g) {
        const InvariantReport r = check_separator_invariants(g, slack, zero);
        for (const auto& f : r.failures) rec.note(name + ": " + f);
        rec.require(r.ok(), name + " violates grid invariants");
        ++checked;
    };
    auto oracle_grid = [](std::span<const double> qs, const std::function<std::pair<double, double>(double)>& fn) {
        SeparatorGrid g;
        g.q_grid.assign(qs.begin(), qs.end());
        for (double q : qs) {
            const auto [lo, hi] = fn(q);
            g.b.push_back(lo);
            g.B.push_back(hi);
            g.Lambda.push_back(hi);
        }
        return g;
    };

    const auto wide = grid(-5.0, 5.0, 0.25);
    const auto narrow = grid(-3.0, 3.0, 0.25);

    const MoranMeasure uni(fx.uniform);
    check("uniform", separator_grid(uni, wide, std::min<std::int64_t>(uni.depth_cap(), 60)));
    check("uniform oracle", oracle_grid(wide, [](double q) {
              const double v = oracles::uniform_beta(q);
              return std::pair{v, v};
          }));

    const MoranMeasure bin(fx.binomial);
    const double p = bin.family(0).probs[0];
    check("binomial", separator_grid(bin, wide, std::min<std::int64_t>(bin.depth_cap(), 60)));
    check("binomial oracle", oracle_grid(wide, [p](double q) {
              const double v = q == 1.0 ? 0.0 : oracles::binomial_tau(p, q);
              return std::pair{v, v};
          }));

    const MoranMeasure per(fx.periodic);
    const auto& a = per.family(0);
    const auto& b = per.family(1);
    check("periodic", separator_grid(per, wide, 1000));
    check("periodic oracle", oracle_grid(wide, [&](double q) {
              const double v = oracles::periodic_moran_beta(a.probs, a.ratios[0], b.probs, b.ratios[0], q);
              return std::pair{v, v};
          }));

    const MoranMeasure blk(fx.block);
    const auto& c = blk.family(0);
    const auto& d = blk.family(1);
    check("block", separator_grid(blk, narrow, std::min<std::int64_t>(blk.depth_cap(), std::int64_t{1} << 20)));
    check("block oracle", oracle_grid(narrow, [&](double q) {
              const auto r = oracles::block_moran_bounds(c.probs, c.ratios[0], d.probs, d.ratios[0], q);
              return std::pair{r.liminf, r.limsup};
          }));

    const MoranMeasure sw(fx.switching);
    const double ps = sw.family(1).probs[0];
    const double ph = sw.family(0).probs[0];
    check("switching", separator_grid(sw, narrow, sw.depth_cap()));
    check("switching oracle", oracle_grid(narrow, [&](double q) {
              const auto t = oracles::switching_binomial_tau(ps, ph, q);
              return std::pair{std::min(t.tau, t.tau_hat), std::max(t.tau, t.tau_hat)};
          }));
    rec.value("grids_checked", static_cast<double>(checked));
}

// ------------------------------------------------------------- 7

bool concave(std::span<const double> x, std::span<const double> y, std::span<const char> skip, double slack) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!skip[i] && std::isfinite(y[i])) idx.push_back(i);
    }
    for (std::size_t j = 1; j + 1 < idx.size(); ++j) {
        const std::size_t i0 = idx[j - 1], i1 = idx[j], i2 = idx[j + 1];
        const double w = (x[i1] - x[i0]) / (x[i2] - x[i0]);
        if (y[i1] < y[i0] + w * (y[i2] - y[i0]) - slack) return false;
    }
    return true;
}

void legendre_checks(const Fixtures& fx, const Options& opt, Recorder& rec) {
    const auto qs = grid(-6.0, 6.0, 0.1);
    const double eps = 0.05;
    struct Case {
        const char* name;
        const MoranMeasureSpec* spec;
        std::int64_t k_max;
        std::int64_t coarse_generation;  // 0: the separator k_max
    };
    const Case cases[] = {{"uniform", &fx.uniform, 60, 20},
                          {"binomial", &fx.binomial, 60, 20},
                          {"periodic", &fx.periodic, 1000, 20},
                          {"block", &fx.block, std::int64_t{1} << 20, 0},
                          {"switching", &fx.switching, std::int64_t{1} << 21, 0}};
    for (const Case& cs : cases) {
        const MoranMeasure m(*cs.spec);
        const std::int64_t k_max = std::min(cs.k_max, m.depth_cap());
        const SeparatorGrid g = separator_grid(m, qs, k_max);

        // Regular abscissae plus the exponents -beta'(q) at the grid nodes,
        // where monofractal transforms are finite.
        auto alphas = grid(0.0, 2.5, 0.01);
        for (std::size_t i = 1; i + 1 < qs.size(); ++i) {
            alphas.push_back(-(g.b[i + 1] - g.b[i - 1]) / (qs[i + 1] - qs[i - 1]));
        }
        std::sort(alphas.begin(), alphas.end());
        alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());

        const LegendreResult bs = legendre_transform(qs, g.b, alphas);
        const LegendreResult Bs = legendre_transform(qs, g.B, alphas);

        // Independent re-evaluation on the same grid with the same arithmetic.
        bool bitwise = true;
        for (std::size_t ia = 0; ia < alphas.size(); ++ia) {
            double lo_b = kInf;
            double lo_B = kInf;
            for (std::size_t i = 0; i < qs.size(); ++i) {
                lo_b = std::min(lo_b, alphas[ia] * qs[i] + g.b[i]);
                lo_B = std::min(lo_B, alphas[ia] * qs[i] + g.B[i]);
            }
            bitwise = bitwise && lo_b == bs.value[ia] && lo_B == Bs.value[ia];
        }
        const std::string name(cs.name);
        rec.require(bitwise, name + ": Legendre values differ from the grid oracle");
        rec.require(concave(alphas, bs.value, bs.boundary, 1e-8 * opt.tolerance_scale), name + ": b* not concave");
        rec.require(concave(alphas, Bs.value, Bs.boundary, 1e-8 * opt.tolerance_scale), name + ": B* not concave");

        const double log_r = m.log_max_length(cs.coarse_generation == 0 ? k_max : cs.coarse_generation);
        CoarseOptions co;
        co.seed = derive_seed(opt.seed, 700);
        const CoarseSpectrum coarse = coarse_spectrum_log(m, std::span<const double>(&log_r, 1), eps, alphas, co);
        double worst = -kInf;
        double worst_alpha = 0.0;
        std::size_t compared = 0;
        for (std::size_t ia = 0; ia < alphas.size(); ++ia) {
            const CoarseBin& bin = coarse.at(0, ia);
            if (bin.empty || bs.boundary[ia]) continue;
            if (bin.f_hat - bs.value[ia] > worst) {
                worst = bin.f_hat - bs.value[ia];
                worst_alpha = alphas[ia];
            }
            ++compared;
        }
        rec.value(name + ".finest_generation", static_cast<double>(coarse.bins.front().generation));
        rec.value(name + ".bins_compared", static_cast<double>(compared));
        rec.value(name + ".worst_alpha", worst_alpha);
        rec.at_most(name + ".max_f_hat_minus_b_star", worst, 0.06 * opt.tolerance_scale);
    }
}

// ------------------------------------------------------------- 8

void coarse_binomial(const Fixtures& fx, const Options& opt, Recorder& rec) {
    const MoranMeasure m(fx.binomial);
    const double p = m.family(0).probs[0];
    const double r = std::ldexp(1.0, -16);
    const double eps = 0.05;
    const double peak_alpha = 0.8113;
    const double lo = -std::log2(1.0 - p) - 0.1;
    const double hi = -std::log2(p) + 0.1;
    auto alphas = grid(0.0, 2.5, 0.01);
    alphas.push_back(peak_alpha);
    std::sort(alphas.begin(), alphas.end());
    const CoarseSpectrum coarse = coarse_spectrum(m, std::span<const double>(&r, 1), eps, alphas);
    double peak = -kInf;
    double argpeak = 0.0;
    double at_alpha = -kInf;
    double outside = -kInf;
    for (std::size_t ia = 0; ia < alphas.size(); ++ia) {
        const CoarseBin& bin = coarse.at(0, ia);
        const double f = bin.empty ? -kInf : bin.f_hat;
        if (f > peak) {
            peak = f;
            argpeak = alphas[ia];
        }
        if (alphas[ia] == peak_alpha) at_alpha = f;
        if ((alphas[ia] < lo || alphas[ia] > hi) && !bin.empty) outside = std::max(outside, f);
    }
    rec.value("peak_f_hat", peak);
    rec.value("peak_alpha", argpeak);
    rec.value("f_hat_at_0.8113", at_alpha);
    rec.at_most("abs_peak_minus_1", std::abs(peak - 1.0), 0.05 * opt.tolerance_scale);
    rec.at_most("abs_f_hat_at_0.8113_minus_1", std::abs(at_alpha - 1.0), 0.05 * opt.tolerance_scale);
    rec.at_most("max_f_hat_outside", std::max(outside, 0.0), 0.05 * opt.tolerance_scale);
}

// ------------------------------------------------------------- 9

double binomial_local_exponent(double p, double q) {
    // -d/dq log2(p^q + (1-p)^q)
    const double a = std::pow(p, q);
    const double b = std::pow(1.0 - p, q);
    return -(a * std::log2(p) + b * std::log2(1.0 - p)) / (a + b);
}

void tilted_sampler(const Fixtures& fx, const Options& opt, Recorder& rec) {
    const MoranMeasure bin(fx.binomial);
    const MoranMeasure uni(fx.uniform);
    const double p = bin.family(0).probs[0];
    std::uint64_t task = 0;
    for (double q : {0.0, 1.0, 2.0}) {
        const TiltedCheck t = tilted_dimension_check(bin, q, solve_beta_k(bin, q, 30), 30, 10000,
                                                     derive_seed(opt.seed, 900 + task++));
        const double want = binomial_local_exponent(p, q);
        rec.value(q_key("binomial.alpha_emp_mean", q), t.alpha_emp_mean);
        rec.value(q_key("binomial.alpha_pred", q), want);
        rec.at_most(q_key("binomial.error", q), std::abs(t.alpha_emp_mean - want), 0.02 * opt.tolerance_scale);
        const TiltedCheck u = tilted_dimension_check(uni, q, solve_beta_k(uni, q, 30), 30, 10000,
                                                     derive_seed(opt.seed, 900 + task++));
        rec.value(q_key("uniform.alpha_emp_mean", q), u.alpha_emp_mean);
        rec.value(q_key("uniform.alpha_emp_sd", q), u.alpha_emp_sd);
        rec.require(u.alpha_emp_mean == 1.0 && u.alpha_emp_sd == 0.0, "uniform tilted exponent is not exactly 1");
    }
}

// ------------------------------------------------------------- 10

void greedy_brackets(const Fixtures& fx, const Options& opt, Recorder& rec) {
    const double slack = 1e-9 * opt.tolerance_scale;
    const std::vector<double> radii{0.5, 1.0 / 3.0, 0.125, 1.0 / 18.0, 1.0 / 27.0, 1.0 / 64.0, 0.013, 0.005};
    const std::pair<const char*, const MoranMeasureSpec*> specs[] = {
        {"uniform", &fx.uniform}, {"middle_thirds", &fx.middle_thirds}, {"binomial", &fx.binomial}};
    std::size_t cases = 0;
    double worst_pack = 0.0;   // (greedy - oracle) / oracle, must be <= 0
    double worst_cover = 0.0;  // (oracle - greedy) / oracle, must be <= 0
    for (const auto& [name, spec] : specs) {
        const MoranMeasure m(*spec);
        const std::int64_t depth = std::min<std::int64_t>(oracles::kBruteForceDepthLimit, m.depth_cap());
        for (double r : radii) {
            for (double q : {-1.0, 0.0, 1.0, 2.0}) {
                const auto bf = oracles::brute_force_ball_moments(m, q, r, depth);
                const MomentValue pk = packing_moment(m, q, r, depth);
                const MomentValue cv = covering_moment(m, q, r, depth);
                worst_pack = std::max(worst_pack, (pk.value - bf.packing) / bf.packing);
                worst_cover = std::max(worst_cover, (bf.covering - cv.value) / bf.covering);
                if (q == 0.0) {
                    rec.require(pk.value == static_cast<double>(packing_count(m, r)) &&
                                    cv.value == static_cast<double>(covering_count(m, r)),
                                std::string(name) + ": q = 0 moments differ from counts");
                }
                ++cases;
            }
        }
    }
    rec.value("cases", static_cast<double>(cases));
    rec.at_most("packing_excess_over_oracle", worst_pack, slack);
    rec.at_most("covering_deficit_under_oracle", worst_cover, slack);
}

const char* criterion_name(int id) {
    switch (id) {
    case 1: return "normalization_root";
    case 2: return "uniform_oracle";
    case 3: return "periodic_moran";
    case 4: return "block_moran";
    case 5: return "switching_binomial";
    case 6: return "structural_properties";
    case 7: return "legendre";
    case 8: return "coarse_spectrum";
    case 9: return "tilted_sampler";
    case 10: return "greedy_vs_oracle";
    case 11: return "determinism";
    }
    return "unknown";
}

}  // namespace

Fixtures default_fixtures() {
    return {catalog::uniform_dyadic(),        catalog::binomial(0.25),    catalog::middle_thirds(),
            catalog::periodic_moran(),        catalog::block_moran(),     catalog::switching_binomial(0.2, 0.4)};
}

Fixtures load_fixtures(const std::string& directory) {
    const std::filesystem::path dir(directory);
    auto load = [&](const char* file) {
        const auto path = dir / file;
        if (!std::filesystem::exists(path)) throw Error(ErrorCode::ParseError, "missing spec fixture " + path.string());
        return load_spec(path);
    };
    return {load("uniform.json"),        load("binomial_p025.json"), load("middle_thirds.json"),
            load("periodic_moran.json"), load("block_moran.json"),   load("switching_binomial.json")};
}

bool Report::pass() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.pass; });
}

double runtime_limit(int id) {
    switch (id) {
    case 1: return 5.0;
    case 2: return 1.0;
    case 3: return 1.0;
    case 4: return 10.0;
    case 8: return 30.0;
    }
    return 0.0;
}

MoranMeasureSpec random_spec(Rng& rng) {
    auto uniform_in = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
    MoranMeasureSpec spec;
    spec.gap_policy = rng.next() % 2 == 0 ? GapPolicy::NoGaps : GapPolicy::EqualGaps;
    const std::size_t nf = 1 + rng.next() % 3;
    for (std::size_t f = 0; f < nf; ++f) {
        const std::size_t n = 2 + rng.next() % 3;
        GenerationFamily fam;
        double ps = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            fam.probs.push_back(uniform_in(0.05, 1.0));
            ps += fam.probs.back();
        }
        for (double& p : fam.probs) p /= ps;
        const bool constant = rng.next() % 2 == 0;
        const double total = spec.gap_policy == GapPolicy::NoGaps ? 1.0 : uniform_in(0.2, 0.95);
        double cs = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            fam.ratios.push_back(constant ? 1.0 : uniform_in(0.2, 1.0));
            cs += fam.ratios.back();
        }
        for (double& c : fam.ratios) c *= total / cs;
        if (spec.gap_policy == GapPolicy::NoGaps) {
            // Make the sum exact so validation sees 1 to rounding.
            double rest = 1.0;
            for (std::size_t i = 0; i + 1 < n; ++i) rest -= fam.ratios[i];
            fam.ratios.back() = rest;
        }
        // Renormalize the probabilities the same way.
        double prest = 1.0;
        for (std::size_t i = 0; i + 1 < n; ++i) prest -= fam.probs[i];
        fam.probs.back() = prest;
        spec.families.push_back(std::move(fam));
    }
    const std::int64_t cap = 2000;
    switch (rng.next() % 3) {
    case 0:
        spec.schedule = Schedule::constant(rng.next() % nf, cap);
        break;
    case 1: {
        std::vector<std::size_t> cycle;
        const std::size_t len = 1 + rng.next() % 4;
        for (std::size_t i = 0; i < len; ++i) cycle.push_back(rng.next() % nf);
        spec.schedule = Schedule::periodic(std::move(cycle), cap);
        break;
    }
    default: {
        std::vector<std::int64_t> bounds{1};
        while (bounds.back() < cap) bounds.push_back(bounds.back() + 1 + static_cast<std::int64_t>(rng.next() % 300));
        bounds.pop_back();
        std::vector<std::size_t> fams;
        for (std::size_t i = 0; i < 1 + rng.next() % 3; ++i) fams.push_back(rng.next() % nf);
        spec.schedule = Schedule::blocks(std::move(bounds), std::move(fams), cap);
        break;
    }
    }
    return spec;
}

CriterionResult run_criterion(int id, const Fixtures& fixtures, const Options& options) {
    CriterionResult res;
    res.id = id;
    res.name = criterion_name(id);
    res.pass = true;
    Recorder rec{res};
    const auto t0 = std::chrono::steady_clock::now();
    try {
        switch (id) {
        case 1: normalization_root(fixtures, options, rec); break;
        case 2: uniform_oracle(fixtures, options, rec); break;
        case 3: periodic_oracle(fixtures, options, rec); break;
        case 4: block_bounds(fixtures, options, rec); break;
        case 5: switching_binomial(fixtures, options, rec); break;
        case 6: structural(fixtures, options, rec); break;
        case 7: legendre_checks(fixtures, options, rec); break;
        case 8: coarse_binomial(fixtures, options, rec); break;
        case 9: tilted_sampler(fixtures, options, rec); break;
        case 10: greedy_brackets(fixtures, options, rec); break;
        default: throw Error(ErrorCode::InvalidArgument, "criterion id must be in 1..10");
        }
    } catch (const Error& e) {
        res.pass = false;
        res.notes.emplace_back(e.what());
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

Report run_all(const Fixtures& fixtures, const Options& options,
               const std::function<void(const CriterionResult&)>& on_result) {
    Report report;
    for (int id = 1; id < kCriterionCount; ++id) {
        report.criteria.push_back(run_criterion(id, fixtures, options));
        if (on_result) on_result(report.criteria.back());
    }
    std::vector<CriterionResult> again;
    const auto t0 = std::chrono::steady_clock::now();
    for (int id = 1; id < kCriterionCount; ++id) again.push_back(run_criterion(id, fixtures, options));
    CriterionResult det;
    det.id = kCriterionCount;
    det.name = criterion_name(kCriterionCount);
    const std::string first = criteria_json(report.criteria);
    const std::string second = criteria_json(again);
    det.pass = first == second;
    det.measured.emplace_back("serialized_bytes", static_cast<double>(first.size()));
    if (!det.pass) det.notes.emplace_back("second run serialized differently");
    det.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.criteria.push_back(det);
    if (on_result) on_result(det);
    return report;
}

namespace {

nlohmann::ordered_json criterion_to_json(const CriterionResult& c) {
    nlohmann::ordered_json j;
    j["id"] = c.id;
    j["name"] = c.name;
    j["pass"] = c.pass;
    nlohmann::ordered_json measured = nlohmann::ordered_json::object();
    for (const auto& [k, v] : c.measured) {
        if (std::isfinite(v)) {
            measured[k] = v;
        } else {
            measured[k] = format_double(v);
        }
    }
    j["measured"] = measured;
    j["notes"] = c.notes;
    return j;
}

}  // namespace

std::string criteria_json(const std::vector<CriterionResult>& criteria) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : criteria) arr.push_back(criterion_to_json(c));
    return arr.dump(2);
}

std::string report_json(const Report& report, const std::string& meta_json) {
    nlohmann::ordered_json j;
    j["meta"] = nlohmann::ordered_json::parse(meta_json);
    j["pass"] = report.pass();
    j["criteria"] = nlohmann::ordered_json::array();
    for (const auto& c : report.criteria) j["criteria"].push_back(criterion_to_json(c));
    return j.dump(2) + "\n";
}

std::string summary_line(const CriterionResult& result, bool with_time) {
    std::ostringstream out;
    out << (result.pass ? "PASS" : "FAIL") << "  criterion " << result.id << "  " << result.name;
    if (with_time) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", result.seconds);
        out << "  (" << buf << " s";
        if (const double limit = runtime_limit(result.id); limit > 0.0) out << ", budget " << limit << " s";
        out << ")";
    }
    for (const auto& n : result.notes) out << "\n      " << n;
    return out.str();
}

}  // namespace hsmf::acceptance
