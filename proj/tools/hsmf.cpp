// hsmf: command-line front end.
//
//   hsmf validate --spec FILE
//   hsmf dims     --spec FILE [--q-min A --q-max B --q-step H] [--k-max K] --out DIR
//   hsmf spectrum --spec FILE [q grid] [--k-max K] [--r-octaves N] [--epsilon E] --out DIR
//   hsmf moments  --spec FILE [q grid] [--r-octaves N] [--kind KIND] --out DIR
//   hsmf sample   --spec FILE --q Q [--t T] [--depth D] [--count N] --out DIR
//   hsmf verify   [--spec DIR] [--tolerance-scale S] --out DIR
//
// Exit codes: 0 ok, 1 invariant or criterion failure (or a numerical error),
// 2 usage or parse error.  Existing outputs are replaced only with --force.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hsmf/acceptance.hpp"
#include "hsmf/counting.hpp"
#include "hsmf/measure.hpp"
#include "hsmf/numeric.hpp"
#include "hsmf/scaling.hpp"
#include "hsmf/spec_io.hpp"
#include "hsmf/spectrum.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace hsmf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    std::string spec;
    double q_min = -5.0;
    double q_max = 5.0;
    double q_step = 0.25;
    std::int64_t k_max = 0;  // 0: depth cap
    int r_octaves = 16;
    double epsilon = 0.05;
    double alpha_min = 0.0;
    double alpha_max = 3.0;
    double alpha_step = 0.01;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "csv";
    bool force = false;
    std::string kind = "all";
    double q = 1.0;
    std::optional<double> t;
    std::int64_t depth = 30;
    std::size_t count = 10000;
    std::vector<double> tilt_q{0.0, 1.0, 2.0};
    double tolerance_scale = 1.0;
};

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex16(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

class Session {
public:
    Session(const RunConfig& cfg, const std::string& spec_text) : cfg_(cfg) {
        std::ostringstream c;
        c << cfg.command << "\nq=" << format_double(cfg.q_min) << ',' << format_double(cfg.q_max) << ','
          << format_double(cfg.q_step) << "\nk_max=" << cfg.k_max << "\nr_octaves=" << cfg.r_octaves
          << "\nepsilon=" << format_double(cfg.epsilon) << "\nalpha=" << format_double(cfg.alpha_min) << ','
          << format_double(cfg.alpha_max) << ',' << format_double(cfg.alpha_step) << "\nformat=" << cfg.format
          << "\nkind=" << cfg.kind << "\nsample=" << format_double(cfg.q) << ','
          << (cfg.t ? format_double(*cfg.t) : "auto") << ',' << cfg.depth << ',' << cfg.count << "\ntilt_q=";
        for (double q : cfg.tilt_q) c << format_double(q) << ';';
        c << "\ntolerance_scale=" << format_double(cfg.tolerance_scale) << "\nspec=" << spec_text;
        config_hash_ = hex16(fnv1a(c.str()));
    }

    std::string header() const {
        return std::string("# hsmf ") + HSMF_VERSION + " config=" + config_hash_ + " seed=" + std::to_string(cfg_.seed);
    }

    json meta() const {
        json m;
        m["tool"] = "hsmf";
        m["version"] = HSMF_VERSION;
        m["command"] = cfg_.command;
        m["config"] = config_hash_;
        m["seed"] = cfg_.seed;
        return m;
    }

    // Refuses to start when any target exists and --force is absent.
    void claim(const std::vector<std::string>& names) {
        const fs::path dir(cfg_.out);
        for (const auto& n : names) {
            if (fs::exists(dir / n) && !cfg_.force) {
                throw UsageError((dir / n).string() + " exists; pass --force to overwrite");
            }
        }
        fs::create_directories(dir);
    }

    // Tabular output: CSV as produced by the library writers, or the same
    // table as JSON when --format json.
    void write_table(const std::string& stem, const std::string& csv) const {
        if (cfg_.format == "json") {
            write_text(stem + ".json", csv_to_json(csv).dump(2) + "\n");
        } else {
            write_text(stem + ".csv", header() + "\n" + csv);
        }
    }

    void write_json(const std::string& name, json body) const {
        json j;
        j["meta"] = meta();
        for (auto& [k, v] : body.items()) j[k] = v;
        write_text(name, j.dump(2) + "\n");
    }

    std::string table_name(const std::string& stem) const { return stem + (cfg_.format == "json" ? ".json" : ".csv"); }

private:
    void write_text(const std::string& name, const std::string& text) const {
        const fs::path p = fs::path(cfg_.out) / name;
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        out << text;
        if (!out) throw std::runtime_error("cannot write " + p.string());
    }

    json csv_to_json(const std::string& csv) const {
        json j;
        j["meta"] = meta();
        j["columns"] = json::array();
        j["rows"] = json::array();
        std::istringstream in(csv);
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::vector<std::string> cells;
            std::stringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ',')) cells.push_back(cell);
            if (first) {
                for (auto& c : cells) j["columns"].push_back(c);
                first = false;
                continue;
            }
            json row = json::array();
            for (const auto& c : cells) row.push_back(cell_value(c));
            j["rows"].push_back(row);
        }
        return j;
    }

    static json cell_value(const std::string& c) {
        if (c == "true") return true;
        if (c == "false") return false;
        std::int64_t i = 0;
        const auto ri = std::from_chars(c.data(), c.data() + c.size(), i);
        if (ri.ec == std::errc() && ri.ptr == c.data() + c.size()) return i;
        double v = 0.0;
        const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
        if (res.ec == std::errc() && res.ptr == c.data() + c.size() && std::isfinite(v)) return v;
        return c;
    }

    const RunConfig& cfg_;
    std::string config_hash_;
};

std::vector<double> q_grid(const RunConfig& cfg) {
    if (!(cfg.q_step > 0.0)) throw UsageError("--q-step must be positive");
    if (!(cfg.q_min < cfg.q_max)) throw UsageError("--q-min must be below --q-max");
    const auto n = static_cast<std::int64_t>(std::floor((cfg.q_max - cfg.q_min) / cfg.q_step + 1e-9));
    std::vector<double> out;
    for (std::int64_t i = 0; i <= n; ++i) out.push_back(cfg.q_min + static_cast<double>(i) * cfg.q_step);
    return out;
}

std::vector<double> alpha_grid(const RunConfig& cfg) {
    if (!(cfg.alpha_step > 0.0) || !(cfg.alpha_min < cfg.alpha_max)) throw UsageError("bad alpha grid");
    const auto n = static_cast<std::int64_t>(std::floor((cfg.alpha_max - cfg.alpha_min) / cfg.alpha_step + 1e-9));
    std::vector<double> out;
    for (std::int64_t i = 0; i <= n; ++i) out.push_back(cfg.alpha_min + static_cast<double>(i) * cfg.alpha_step);
    return out;
}

// r = 2^-1, ..., 2^-N.
std::vector<double> dyadic_radii(const RunConfig& cfg) {
    if (cfg.r_octaves < 1) throw UsageError("--r-octaves must be at least 1");
    std::vector<double> out;
    for (int j = 1; j <= cfg.r_octaves; ++j) out.push_back(std::ldexp(1.0, -j));
    return out;
}

std::int64_t effective_k_max(const RunConfig& cfg, const MoranMeasure& m) {
    if (cfg.k_max < 0) throw UsageError("--k-max must be positive");
    return cfg.k_max == 0 ? m.depth_cap() : std::min(cfg.k_max, m.depth_cap());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, "cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

MoranMeasure load_measure(const RunConfig& cfg, std::string& canonical) {
    if (cfg.spec.empty()) throw UsageError("--spec is required");
    MoranMeasureSpec spec = parse_spec(read_file(cfg.spec));
    canonical = dump_spec(spec);
    return MoranMeasure(std::move(spec));
}

json violations_json(const ValidationReport& report) {
    json arr = json::array();
    for (const auto& v : report.violations) {
        json e;
        e["code"] = std::string(to_string(v.code));
        e["message"] = v.message;
        arr.push_back(e);
    }
    return arr;
}

// ------------------------------------------------------------------ commands

int cmd_validate(const RunConfig& cfg) {
    if (cfg.spec.empty()) throw UsageError("--spec is required");
    const std::string text = read_file(cfg.spec);
    const MoranMeasureSpec spec = parse_spec(text);
    const ValidationReport report = validate_spec(spec);
    Session session(cfg, dump_spec(spec));
    json j;
    j["meta"] = session.meta();
    j["valid"] = report.ok();
    j["violations"] = violations_json(report);
    std::cout << j.dump(2) << std::endl;
    return report.ok() ? kExitOk : kExitFailure;
}

int cmd_dims(const RunConfig& cfg) {
    std::string canonical;
    const MoranMeasure m = load_measure(cfg, canonical);
    Session session(cfg, canonical);
    session.claim({session.table_name("separators"), "diagnostics.json"});

    const auto qs = q_grid(cfg);
    const std::int64_t k_max = effective_k_max(cfg, m);
    const SeparatorGrid grid = separator_grid(m, qs, k_max);
    const InvariantReport inv = check_separator_invariants(grid);

    std::ostringstream csv;
    write_separator_csv(csv, grid);
    session.write_table("separators", csv.str());

    json body;
    body["k_max"] = k_max;
    body["invariants_ok"] = inv.ok();
    body["invariant_failures"] = inv.failures;
    json rows = json::array();
    for (std::size_t i = 0; i < qs.size(); ++i) {
        const auto& d = grid.diagnostics[i];
        json r;
        r["q"] = qs[i];
        r["window_first"] = d.window.first;
        r["window_last"] = d.window.last;
        r["stride"] = d.stride;
        r["oscillation"] = d.oscillation;
        r["converged"] = d.converged;
        r["theta_slope"] = d.theta_slope;
        rows.push_back(r);
    }
    body["per_q"] = rows;
    session.write_json("diagnostics.json", body);
    if (!inv.ok()) {
        for (const auto& f : inv.failures) std::cerr << "invariant: " << f << "\n";
        return kExitFailure;
    }
    return kExitOk;
}

int cmd_spectrum(const RunConfig& cfg) {
    std::string canonical;
    const MoranMeasure m = load_measure(cfg, canonical);
    Session session(cfg, canonical);
    if (!(cfg.epsilon > 0.0)) throw UsageError("--epsilon must be positive");
    if (cfg.depth < 1 || cfg.count < 2) throw UsageError("--depth must be >= 1 and --count >= 2");
    session.claim({session.table_name("legendre"), session.table_name("coarse"), "tilted.json"});

    const auto qs = q_grid(cfg);
    const std::int64_t k_max = effective_k_max(cfg, m);
    const SeparatorGrid grid = separator_grid(m, qs, k_max);

    SpectrumResult res;
    res.alpha_grid = alpha_grid(cfg);
    res.b_star = legendre_transform(qs, grid.b, res.alpha_grid);
    res.B_star = legendre_transform(qs, grid.B, res.alpha_grid);
    const bool has_bounds = qs.front() < 0.0 && qs.back() > 0.0;
    if (has_bounds) res.bounds = alpha_bounds(grid);

    CoarseOptions co;
    co.seed = derive_seed(cfg.seed, 1);
    const auto radii = dyadic_radii(cfg);
    res.coarse = coarse_spectrum(m, radii, cfg.epsilon, res.alpha_grid, co);

    const std::int64_t depth = std::min(cfg.depth, m.depth_cap());
    for (std::size_t i = 0; i < cfg.tilt_q.size(); ++i) {
        const double q = cfg.tilt_q[i];
        const double t = solve_beta_k(m, q, depth);
        res.tilted.push_back(tilted_dimension_check(m, q, t, depth, cfg.count, derive_seed(cfg.seed, 100 + i)));
    }

    std::ostringstream legendre, coarse;
    write_legendre_csv(legendre, res);
    write_coarse_csv(coarse, res.coarse);
    session.write_table("legendre", legendre.str());
    session.write_table("coarse", coarse.str());

    json body;
    if (has_bounds) {
        body["alpha_min"] = res.bounds.alpha_min;
        body["alpha_max"] = res.bounds.alpha_max;
        body["beta_min"] = res.bounds.beta_min;
        body["beta_max"] = res.bounds.beta_max;
    }
    json checks = json::array();
    for (const auto& t : res.tilted) {
        json c;
        c["q"] = t.q;
        c["t"] = t.t;
        c["depth"] = t.depth;
        c["sample_count"] = t.sample_count;
        c["alpha_hat_pred"] = t.alpha_hat_pred;
        c["alpha_emp_mean"] = t.alpha_emp_mean;
        c["alpha_emp_sd"] = t.alpha_emp_sd;
        c["legendre_value"] = t.legendre_value;
        checks.push_back(c);
    }
    body["tilted"] = checks;
    session.write_json("tilted.json", body);
    return kExitOk;
}

MomentKind parse_kind(const std::string& s) {
    static const std::map<std::string, MomentKind> kinds{
        {"partition", MomentKind::PartitionMoment},   {"covering", MomentKind::CoveringMoment},
        {"packing", MomentKind::PackingMoment},       {"covering_count", MomentKind::CoveringCount},
        {"packing_count", MomentKind::PackingCount}};
    const auto it = kinds.find(s);
    if (it == kinds.end()) throw UsageError("unknown --kind " + s);
    return it->second;
}

int cmd_moments(const RunConfig& cfg) {
    std::string canonical;
    const MoranMeasure m = load_measure(cfg, canonical);
    Session session(cfg, canonical);
    std::vector<MomentKind> kinds;
    if (cfg.kind == "all") {
        kinds = {MomentKind::PartitionMoment, MomentKind::CoveringMoment, MomentKind::PackingMoment};
    } else {
        kinds = {parse_kind(cfg.kind)};
    }
    session.claim({session.table_name("moments")});

    const auto qs = q_grid(cfg);
    const auto radii = dyadic_radii(cfg);
    std::ostringstream csv;
    bool header_done = false;
    for (MomentKind kind : kinds) {
        MomentTable table;
        if (kind == MomentKind::PartitionMoment) {
            std::vector<double> log_radii;
            for (double r : radii) log_radii.push_back(std::log(r));
            table = partition_moment_table(m, qs, log_radii);
        } else {
            table = ball_moment_table(m, kind, qs, radii);
        }
        std::ostringstream one;
        write_moment_csv(one, table);
        std::string text = one.str();
        if (header_done) text.erase(0, text.find('\n') + 1);
        header_done = true;
        csv << text;
    }
    session.write_table("moments", csv.str());
    return kExitOk;
}

int cmd_sample(const RunConfig& cfg) {
    std::string canonical;
    const MoranMeasure m = load_measure(cfg, canonical);
    Session session(cfg, canonical);
    if (cfg.depth < 1 || cfg.depth > m.depth_cap()) throw UsageError("--depth must lie in [1, depth_cap]");
    if (cfg.count < 1) throw UsageError("--count must be positive");
    session.claim({session.table_name("samples")});

    const double t = cfg.t ? *cfg.t : solve_beta_k(m, cfg.q, cfg.depth);
    const TiltedSampler sampler(m, cfg.q, t);
    Rng rng(cfg.seed);
    std::ostringstream csv;
    csv << "index,alpha,log_mass,log_length,address\n";
    for (std::size_t i = 0; i < cfg.count; ++i) {
        NodeAddress addr;
        const PathDraw d = sampler.draw(cfg.depth, rng, &addr);
        csv << i << ',' << format_double(d.log_mass / d.log_length) << ',' << format_double(d.log_mass) << ','
            << format_double(d.log_length) << ',';
        for (std::size_t j = 0; j < addr.path.size(); ++j) csv << (j ? "-" : "") << addr.path[j];
        csv << '\n';
    }
    session.write_table("samples", csv.str());
    return kExitOk;
}

int cmd_verify(const RunConfig& cfg) {
    acceptance::Fixtures fixtures;
    std::string canonical = "builtin";
    if (!cfg.spec.empty()) {
        fixtures = acceptance::load_fixtures(cfg.spec);
        canonical.clear();
        for (const auto* s : {&fixtures.uniform, &fixtures.binomial, &fixtures.middle_thirds, &fixtures.periodic,
                              &fixtures.block, &fixtures.switching}) {
            canonical += dump_spec(*s);
        }
    } else {
        fixtures = acceptance::default_fixtures();
    }
    if (!(cfg.tolerance_scale > 0.0)) throw UsageError("--tolerance-scale must be positive");
    Session session(cfg, canonical);
    session.claim({"report.json"});

    acceptance::Options options;
    options.seed = cfg.seed;
    options.tolerance_scale = cfg.tolerance_scale;
    const acceptance::Report report = acceptance::run_all(fixtures, options, [](const acceptance::CriterionResult& r) {
        std::cout << acceptance::summary_line(r, false) << std::endl;
    });
    const fs::path p = fs::path(cfg.out) / "report.json";
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << acceptance::report_json(report, session.meta().dump());
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return report.pass() ? kExitOk : kExitFailure;
}

void add_grid_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--q-min", cfg.q_min, "smallest q")->capture_default_str();
    sub->add_option("--q-max", cfg.q_max, "largest q")->capture_default_str();
    sub->add_option("--q-step", cfg.q_step, "q spacing")->capture_default_str();
}

void add_common(CLI::App* sub, RunConfig& cfg, bool needs_out) {
    sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    auto* out = sub->add_option("--out", cfg.out, "output directory");
    if (needs_out) out->required();
    sub->add_option("--format", cfg.format, "table format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    sub->add_flag("--force", cfg.force, "overwrite existing outputs");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hewitt-Stromberg multifractal analysis of homogeneous Moran measures"};
    app.set_version_flag("--version", std::string("hsmf ") + HSMF_VERSION);
    app.require_subcommand(1);
    RunConfig cfg;

    auto* validate = app.add_subcommand("validate", "check a spec file");
    validate->add_option("--spec", cfg.spec, "spec JSON file")->required();

    auto* dims = app.add_subcommand("dims", "separator functions b, B, Lambda, Theta, Delta on a q grid");
    dims->add_option("--spec", cfg.spec, "spec JSON file")->required();
    add_grid_options(dims, cfg);
    dims->add_option("--k-max", cfg.k_max, "deepest generation (default: depth cap)");
    add_common(dims, cfg, true);

    auto* spectrum = app.add_subcommand("spectrum", "Legendre transforms, coarse spectrum and tilted checks");
    spectrum->add_option("--spec", cfg.spec, "spec JSON file")->required();
    add_grid_options(spectrum, cfg);
    spectrum->add_option("--k-max", cfg.k_max, "deepest generation (default: depth cap)");
    spectrum->add_option("--r-octaves", cfg.r_octaves, "coarse radii 2^-1 .. 2^-N")->capture_default_str();
    spectrum->add_option("--epsilon", cfg.epsilon, "coarse bin half-width")->capture_default_str();
    spectrum->add_option("--alpha-min", cfg.alpha_min)->capture_default_str();
    spectrum->add_option("--alpha-max", cfg.alpha_max)->capture_default_str();
    spectrum->add_option("--alpha-step", cfg.alpha_step)->capture_default_str();
    spectrum->add_option("--tilt-q", cfg.tilt_q, "q values for tilted checks")->capture_default_str();
    spectrum->add_option("--depth", cfg.depth, "tilted path depth")->capture_default_str();
    spectrum->add_option("--count", cfg.count, "tilted samples per q")->capture_default_str();
    add_common(spectrum, cfg, true);

    auto* moments = app.add_subcommand("moments", "moment tables over q and dyadic radii");
    moments->add_option("--spec", cfg.spec, "spec JSON file")->required();
    add_grid_options(moments, cfg);
    moments->add_option("--r-octaves", cfg.r_octaves, "radii 2^-1 .. 2^-N")->capture_default_str();
    moments->add_option("--kind", cfg.kind, "all|partition|covering|packing|covering_count|packing_count")
        ->capture_default_str();
    add_common(moments, cfg, true);

    auto* sample = app.add_subcommand("sample", "draw paths from the (q, t)-tilted measure");
    sample->add_option("--spec", cfg.spec, "spec JSON file")->required();
    sample->add_option("--q", cfg.q, "tilt exponent")->capture_default_str();
    sample->add_option("--t", cfg.t, "length exponent (default: beta_depth(q))");
    sample->add_option("--depth", cfg.depth, "path depth")->capture_default_str();
    sample->add_option("--count", cfg.count, "number of paths")->capture_default_str();
    add_common(sample, cfg, true);

    auto* verify = app.add_subcommand("verify", "run the acceptance criteria");
    verify->add_option("--spec", cfg.spec, "directory with the example spec files (default: built in)");
    verify->add_option("--tolerance-scale", cfg.tolerance_scale, "multiplies every tolerance")->capture_default_str();
    add_common(verify, cfg, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (validate->parsed()) {
            cfg.command = "validate";
            return cmd_validate(cfg);
        }
        if (dims->parsed()) {
            cfg.command = "dims";
            return cmd_dims(cfg);
        }
        if (spectrum->parsed()) {
            cfg.command = "spectrum";
            return cmd_spectrum(cfg);
        }
        if (moments->parsed()) {
            cfg.command = "moments";
            return cmd_moments(cfg);
        }
        if (sample->parsed()) {
            cfg.command = "sample";
            return cmd_sample(cfg);
        }
        cfg.command = "verify";
        return cmd_verify(cfg);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        const bool usage = e.code() == ErrorCode::ParseError || e.code() == ErrorCode::InvalidArgument;
        return usage ? kExitUsage : kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}
