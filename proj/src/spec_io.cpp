#include "hsmf/spec_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace hsmf {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& msg) { throw Error(ErrorCode::ParseError, msg); }

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!obj.is_object()) parse_fail(where + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            parse_fail("unknown key '" + key + "' in " + where);
        }
    }
}

const json& require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) parse_fail("missing key '" + std::string(key) + "' in " + where);
    return *it;
}

std::vector<double> real_array(const json& v, const std::string& where) {
    if (!v.is_array()) parse_fail(where + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) parse_fail(where + " must be an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

template <class Int>
std::vector<Int> int_array(const json& v, const std::string& where) {
    if (!v.is_array()) parse_fail(where + " must be an array of integers");
    std::vector<Int> out;
    for (const auto& e : v) {
        if (!e.is_number_integer()) parse_fail(where + " must be an array of integers");
        if constexpr (std::is_unsigned_v<Int>) {
            if (e.get<std::int64_t>() < 0) parse_fail(where + " entries must be non-negative");
        }
        out.push_back(e.get<Int>());
    }
    return out;
}

}  // namespace

MoranMeasureSpec parse_spec(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        parse_fail(e.what());
    }
    reject_unknown(doc, {"families", "schedule", "gap_policy", "depth_cap"}, "spec");

    MoranMeasureSpec spec;
    const auto& fams = require(doc, "families", "spec");
    if (!fams.is_array()) parse_fail("families must be an array");
    for (std::size_t i = 0; i < fams.size(); ++i) {
        const std::string where = "families[" + std::to_string(i) + "]";
        reject_unknown(fams[i], {"probs", "ratios"}, where);
        GenerationFamily fam;
        fam.probs = real_array(require(fams[i], "probs", where), where + ".probs");
        fam.ratios = real_array(require(fams[i], "ratios", where), where + ".ratios");
        spec.families.push_back(std::move(fam));
    }

    const auto& gp = require(doc, "gap_policy", "spec");
    if (gp == "no_gaps") {
        spec.gap_policy = GapPolicy::NoGaps;
    } else if (gp == "equal_gaps") {
        spec.gap_policy = GapPolicy::EqualGaps;
    } else {
        parse_fail("gap_policy must be \"no_gaps\" or \"equal_gaps\"");
    }

    const auto& cap = require(doc, "depth_cap", "spec");
    if (!cap.is_number_integer()) parse_fail("depth_cap must be an integer");
    const auto depth_cap = cap.get<std::int64_t>();

    const auto& sch = require(doc, "schedule", "spec");
    if (!sch.is_object()) parse_fail("schedule must be an object");
    const auto& type = require(sch, "type", "schedule");
    if (type == "constant") {
        reject_unknown(sch, {"type", "family"}, "schedule");
        const auto& f = require(sch, "family", "schedule");
        if (!f.is_number_integer() || f.get<std::int64_t>() < 0) parse_fail("schedule.family must be an index");
        spec.schedule = Schedule::constant(f.get<std::size_t>(), depth_cap);
    } else if (type == "periodic") {
        reject_unknown(sch, {"type", "families"}, "schedule");
        spec.schedule =
            Schedule::periodic(int_array<std::size_t>(require(sch, "families", "schedule"), "schedule.families"),
                               depth_cap);
    } else if (type == "blocks") {
        reject_unknown(sch, {"type", "boundaries", "families"}, "schedule");
        spec.schedule = Schedule::blocks(
            int_array<std::int64_t>(require(sch, "boundaries", "schedule"), "schedule.boundaries"),
            int_array<std::size_t>(require(sch, "families", "schedule"), "schedule.families"), depth_cap);
    } else {
        parse_fail("schedule.type must be constant, periodic or blocks");
    }
    return spec;
}

MoranMeasureSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open spec file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_spec(buf.str());
}

std::string dump_spec(const MoranMeasureSpec& spec) {
    json doc;
    doc["families"] = json::array();
    for (const auto& f : spec.families) doc["families"].push_back({{"probs", f.probs}, {"ratios", f.ratios}});
    const auto& s = spec.schedule;
    switch (s.kind()) {
    case Schedule::Kind::Constant:
        doc["schedule"] = {{"type", "constant"}, {"family", s.families().front()}};
        break;
    case Schedule::Kind::Periodic:
        doc["schedule"] = {{"type", "periodic"}, {"families", s.families()}};
        break;
    case Schedule::Kind::Blocks:
        doc["schedule"] = {{"type", "blocks"}, {"boundaries", s.boundaries()}, {"families", s.families()}};
        break;
    }
    doc["gap_policy"] = spec.gap_policy == GapPolicy::NoGaps ? "no_gaps" : "equal_gaps";
    doc["depth_cap"] = s.depth_cap();
    return doc.dump(2);
}

}  // namespace hsmf
