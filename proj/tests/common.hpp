#pragma once

#include <cmath>
#include <random>

#include "rodctl/constraints.hpp"

namespace testdata {

// Rod released from a cosine profile and brought to rest.
inline rodctl::StateData cosine_to_rest() {
    return {[](double x) { return std::cos(3.0 * x); }, [](double x) { return -std::cos(3.0 * x); },
            [](double) { return 0.0; }, [](double) { return 0.0; }};
}

inline rodctl::StateData zero_states() {
    auto z = [](double) { return 0.0; };
    return {z, z, z, z};
}

// Smooth random data: a few low-frequency trig terms per state.
inline rodctl::StateData random_smooth(unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    auto make = [&] {
        const double a = U(rng), b = U(rng), c = U(rng), w = 1.0 + 2.0 * std::abs(U(rng));
        return [=](double x) { return a * std::cos(w * x) + b * std::sin(2.0 * x) + c * x; };
    };
    auto v0 = make(), r0 = make(), v1 = make(), p1 = make();
    return {v0, r0, v1, p1};
}

}  // namespace testdata
