#include "hsmf/catalog.hpp"

namespace hsmf::catalog {

MoranMeasureSpec uniform_dyadic(std::int64_t depth_cap) {
    return {{{{0.5, 0.5}, {0.5, 0.5}}}, Schedule::constant(0, depth_cap), GapPolicy::NoGaps};
}

MoranMeasureSpec binomial(double p, std::int64_t depth_cap) {
    return {{{{p, 1.0 - p}, {0.5, 0.5}}}, Schedule::constant(0, depth_cap), GapPolicy::NoGaps};
}

MoranMeasureSpec middle_thirds(std::int64_t depth_cap) {
    return {{{{0.5, 0.5}, {1.0 / 3.0, 1.0 / 3.0}}}, Schedule::constant(0, depth_cap), GapPolicy::EqualGaps};
}

MoranMeasureSpec periodic_moran(std::int64_t depth_cap) {
    const double third = 1.0 / 3.0;
    return {{{{0.5, 0.5}, {0.25, 0.25}}, {{third, third, third}, {0.125, 0.125, 0.125}}},
            Schedule::periodic({0, 1}, depth_cap),
            GapPolicy::EqualGaps};
}

MoranMeasureSpec block_moran(std::int64_t depth_cap) {
    const double third = 1.0 / 3.0;
    const double ninth = 1.0 / 9.0;
    std::vector<std::int64_t> boundaries;
    for (std::int64_t t = 1; t <= (std::int64_t{1} << 20); t *= 4) boundaries.push_back(t);
    return {{{{0.25, 0.75}, {0.25, 0.25}}, {{third, third, third}, {ninth, ninth, ninth}}},
            Schedule::blocks(std::move(boundaries), {0, 1}, depth_cap),
            GapPolicy::EqualGaps};
}

MoranMeasureSpec switching_binomial(double p, double p_hat, std::vector<std::int64_t> boundaries,
                                    std::int64_t depth_cap) {
    return {{{{p_hat, 1.0 - p_hat}, {0.5, 0.5}}, {{p, 1.0 - p}, {0.5, 0.5}}},
            Schedule::blocks(std::move(boundaries), {0, 1}, depth_cap),
            GapPolicy::NoGaps};
}

MoranMeasureSpec switching_binomial(double p, double p_hat) {
    return switching_binomial(p, p_hat, {1, 2, 32, 4096, std::int64_t{1} << 21}, std::int64_t{1} << 21);
}

}  // namespace hsmf::catalog
