#pragma once

#include <cmath>
#include <random>

#include "stickytail/model.hpp"

namespace testing_support {

using stickytail::ModelParams;

inline ModelParams m0() {
    ModelParams p;
    p.mu = {-1.0, -1.0};
    return p;
}

inline ModelParams m1() {
    ModelParams p;
    p.mu = {-1.0, -2.0};
    p.stick = {0.5, 0.5};
    return p;
}

// Valid model with general correlation and reflection.
inline ModelParams random_model(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto in = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    for (;;) {
        ModelParams p;
        const double s1 = in(0.3, 2.5), s2 = in(0.3, 2.5), rho = in(-0.85, 0.85);
        p.sigma = {{{s1, rho * std::sqrt(s1 * s2)}, {rho * std::sqrt(s1 * s2), s2}}};
        p.refl = {{{in(0.5, 1.5), in(-0.6, 0.6)}, {in(-0.6, 0.6), in(0.5, 1.5)}}};
        p.mu = {in(-2.0, 1.0), in(-2.0, 1.0)};
        p.stick = {in(0.1, 2.0), in(0.1, 2.0)};
        if (stickytail::check_constraints(p).empty()) return p;
    }
}

// Diagonal covariance, identity reflection: independent coordinates.
inline ModelParams product_form_model(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto in = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    ModelParams p;
    p.sigma = {{{in(0.2, 3.0), 0.0}, {0.0, in(0.2, 3.0)}}};
    p.mu = {in(-3.0, -0.05), in(-3.0, -0.05)};
    p.stick = {in(0.05, 3.0), in(0.05, 3.0)};
    return p;
}

}  // namespace testing_support
