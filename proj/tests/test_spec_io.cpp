#include "doctest.h"
#include "hsmf/catalog.hpp"
#include "hsmf/spec_io.hpp"

using namespace hsmf;

TEST_SUITE("spec_io") {

TEST_CASE("round trip") {
    for (const auto& spec : {catalog::uniform_dyadic(), catalog::periodic_moran(), catalog::block_moran(),
                             catalog::switching_binomial()}) {
        const std::string text = dump_spec(spec);
        const MoranMeasureSpec back = parse_spec(text);
        CHECK(dump_spec(back) == text);
        CHECK(back.schedule.kind() == spec.schedule.kind());
        CHECK(back.schedule.depth_cap() == spec.schedule.depth_cap());
        CHECK(back.families.size() == spec.families.size());
        CHECK(back.families[0].probs == spec.families[0].probs);
    }
}

TEST_CASE("parse") {
    const auto s = parse_spec(R"({"families": [{"probs": [0.25, 0.75], "ratios": [0.5, 0.5]}],
                                  "schedule": {"type": "constant", "family": 0},
                                  "gap_policy": "no_gaps", "depth_cap": 12})");
    CHECK(s.families[0].probs[1] == 0.75);
    CHECK(s.gap_policy == GapPolicy::NoGaps);
    CHECK(s.schedule.depth_cap() == 12);
    CHECK(validate_spec(s).ok());
}

TEST_CASE("parse errors") {
    auto code_of = [](const char* text) {
        try {
            parse_spec(text);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::InvalidArgument;
    };
    CHECK(code_of("{oops") == ErrorCode::ParseError);
    CHECK(code_of("[]") == ErrorCode::ParseError);
    CHECK(code_of(R"({"families": [], "schedule": {"type": "constant", "family": 0},
                      "gap_policy": "no_gaps", "depth_cap": 4, "extra": 1})") == ErrorCode::ParseError);
    CHECK(code_of(R"({"families": [{"probs": [1], "ratios": [1]}], "schedule": {"type": "spiral"},
                      "gap_policy": "no_gaps", "depth_cap": 4})") == ErrorCode::ParseError);
    CHECK(code_of(R"({"families": [{"probs": [1], "ratios": [1]}], "schedule": {"type": "constant", "family": 0},
                      "gap_policy": "sideways", "depth_cap": 4})") == ErrorCode::ParseError);
    CHECK(code_of(R"({"families": [{"probs": "x", "ratios": [1]}], "schedule": {"type": "constant", "family": 0},
                      "gap_policy": "no_gaps", "depth_cap": 4})") == ErrorCode::ParseError);
    CHECK_THROWS_AS(load_spec("/nonexistent/spec.json"), Error);
}

}  // TEST_SUITE
