#pragma once

// JSON spec files.
//
//   {
//     "families":   [ {"probs": [0.25, 0.75], "ratios": [0.5, 0.5]}, ... ],
//     "schedule":   {"type": "constant", "family": 0}
//                 | {"type": "periodic", "families": [0, 1]}
//                 | {"type": "blocks", "boundaries": [1, 4, 16], "families": [0, 1]},
//     "gap_policy": "no_gaps" | "equal_gaps",
//     "depth_cap":  64
//   }
//
// Unknown keys anywhere are rejected.  Parse failures raise ParseError; the
// parsed spec is not validated here (see validate_spec).

#include <filesystem>
#include <string>
#include <string_view>

#include "hsmf/measure.hpp"

namespace hsmf {

MoranMeasureSpec parse_spec(std::string_view json_text);
MoranMeasureSpec load_spec(const std::filesystem::path& path);
std::string dump_spec(const MoranMeasureSpec& spec);

}  // namespace hsmf
