#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsmf/measure.hpp"

namespace test {

// Rows of a reference CSV under tests/fixtures, keyed by column name.
// Lines starting with '#' are provenance comments.
inline std::vector<std::map<std::string, double>> read_fixture(const std::string& name) {
    std::ifstream in(std::string(HSMF_FIXTURE_DIR) + "/" + name);
    if (!in) throw std::runtime_error("missing fixture " + name);
    std::vector<std::string> header;
    std::vector<std::map<std::string, double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (header.empty()) {
            header = cells;
            continue;
        }
        std::map<std::string, double> row;
        for (std::size_t i = 0; i < cells.size(); ++i) row[header.at(i)] = std::stod(cells[i]);
        rows.push_back(row);
    }
    return rows;
}

inline hsmf::MoranMeasureSpec single_family(std::vector<double> probs, std::vector<double> ratios,
                                            hsmf::GapPolicy gaps, std::int64_t depth_cap = 32) {
    hsmf::MoranMeasureSpec s;
    s.families.push_back({std::move(probs), std::move(ratios)});
    s.schedule = hsmf::Schedule::constant(0, depth_cap);
    s.gap_policy = gaps;
    return s;
}

}  // namespace test
