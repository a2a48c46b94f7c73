#pragma once

// Ready-made specs for the measures used throughout the tests, the CLI
// fixtures and the acceptance suite.

#include <cstdint>
#include <vector>

#include "hsmf/measure.hpp"

namespace hsmf::catalog {

// Lebesgue measure on [0, 1] as the dyadic (1/2, 1/2) cascade.
MoranMeasureSpec uniform_dyadic(std::int64_t depth_cap = 64);

// Binomial cascade: left child gets p, right child 1 - p; full support.
MoranMeasureSpec binomial(double p, std::int64_t depth_cap = 64);

// Uniform measure on the middle-thirds Cantor set.
MoranMeasureSpec middle_thirds(std::int64_t depth_cap = 40);

// Alternates a two-child family (probs (1/2, 1/2), ratios 1/4) with a
// three-child family (probs 1/3, ratios 1/8) every generation.
MoranMeasureSpec periodic_moran(std::int64_t depth_cap = 4096);

// Two families: probs (1/4, 3/4) with ratios 1/4, and probs 1/3 with ratios
// 1/9.  Generations [T_i, T_{i+1}) alternate between them with
// T_i = 4^{i-1}, i = 1..11.
MoranMeasureSpec block_moran(std::int64_t depth_cap = std::int64_t{1} << 20);

// Switching binomial: dyadic cascade whose weight alternates between p_hat and
// p on blocks [t_i, t_{i+1}); the first block uses p_hat.
MoranMeasureSpec switching_binomial(double p, double p_hat, std::vector<std::int64_t> boundaries,
                                    std::int64_t depth_cap);

// Default prefix with growing block ratios 2, 16, 128, 512.
MoranMeasureSpec switching_binomial(double p = 0.2, double p_hat = 0.4);

}  // namespace hsmf::catalog
