#pragma once

// End-to-end acceptance checks.  Each criterion produces a pass flag and
// named measurements; nothing time-dependent enters the report, so two runs
// with the same options serialize to identical bytes.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hsmf/measure.hpp"

namespace hsmf::acceptance {

struct Fixtures {
    MoranMeasureSpec uniform;
    MoranMeasureSpec binomial;       // p = 0.25
    MoranMeasureSpec middle_thirds;
    MoranMeasureSpec periodic;
    MoranMeasureSpec block;
    MoranMeasureSpec switching;      // p = 0.2, p_hat = 0.4
};

Fixtures default_fixtures();

// Reads uniform.json, binomial_p025.json, middle_thirds.json,
// periodic_moran.json, block_moran.json and switching_binomial.json.
Fixtures load_fixtures(const std::string& directory);

struct Options {
    std::uint64_t seed = 0;
    double tolerance_scale = 1.0;  // multiplies every numeric tolerance
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::vector<std::pair<std::string, double>> measured;
    std::vector<std::string> notes;
    double seconds = 0.0;  // wall time, reported by callers but never serialized
};

struct Report {
    std::vector<CriterionResult> criteria;

    bool pass() const;
};

// Wall-time budget in seconds for criteria that carry one, 0 otherwise.
double runtime_limit(int id);

// Random valid spec: 1 to 3 families of arity 2 to 4, either gap policy,
// constant or varying ratios, any schedule kind, depth_cap 2000.
MoranMeasureSpec random_spec(Rng& rng);

// Criteria 1 to 10.  Criterion 11 compares serialized reports.
CriterionResult run_criterion(int id, const Fixtures& fixtures, const Options& options);
inline constexpr int kCriterionCount = 11;

// Runs 1..10, then 11 by running 1..10 a second time and comparing the
// serialized bytes.
Report run_all(const Fixtures& fixtures, const Options& options,
               const std::function<void(const CriterionResult&)>& on_result = {});

// Deterministic JSON (no timings).
std::string report_json(const Report& report, const std::string& meta_json);
std::string criteria_json(const std::vector<CriterionResult>& criteria);

// "PASS 3 periodic_moran ..." style line.
std::string summary_line(const CriterionResult& result, bool with_time);

}  // namespace hsmf::acceptance
