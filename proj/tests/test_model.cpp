#include <random>

#include "doctest.h"
#include "stickytail/model.hpp"
#include "support.hpp"

using namespace stickytail;
using testing_support::m0;
using testing_support::m1;

namespace {

bool has(const std::vector<ConstraintViolation>& v, ConstraintKind k) {
    for (const auto& x : v)
        if (x.kind == k) return true;
    return false;
}

// Gaussian elimination on the 3x3 balance system, written independently of the library.
std::array<double, 3> balance_oracle(const ModelParams& p) {
    double a[3][4] = {
        {p.mu[0], p.refl[0][0], p.refl[0][1], 0.0},
        {p.mu[1], p.refl[1][0], p.refl[1][1], 0.0},
        {1.0, p.stick[0], p.stick[1], 1.0},
    };
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        for (int k = 0; k < 4; ++k) std::swap(a[c][k], a[piv][k]);
        for (int r = 0; r < 3; ++r) {
            if (r == c) continue;
            const double f = a[r][c] / a[c][c];
            for (int k = 0; k < 4; ++k) a[r][k] -= f * a[c][k];
        }
    }
    return {a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]};
}

}  // namespace

TEST_CASE("validate accepts the reference models") {
    CHECK(check_constraints(m0()).empty());
    CHECK(check_constraints(m1()).empty());
    ModelParams p = m0();
    p.refl = {{{1.0, -0.5}, {-0.5, 1.0}}};
    CHECK(check_constraints(p).empty());
    CHECK_NOTHROW(validate(p));
}

TEST_CASE("validate reports every violation") {
    ModelParams p;
    p.mu = {1.0, -1.0};
    auto v = check_constraints(p);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == ConstraintKind::UnstableReflection);
    CHECK_THROWS_AS(validate(p), ModelError);

    p.sigma = {{{1.0, 1.0}, {1.0, 1.0}}};
    p.stick = {0.0, 1.0};
    v = check_constraints(p);
    CHECK(has(v, ConstraintKind::NonPositiveDefiniteSigma));
    CHECK(has(v, ConstraintKind::UnstableReflection));
    CHECK(has(v, ConstraintKind::DegenerateCorrelation));
    CHECK(has(v, ConstraintKind::NonPositiveStickiness));
    try {
        validate(p);
        FAIL("expected ModelError");
    } catch (const ModelError& e) {
        CHECK(e.code() == ErrorCode::ValidationError);
        CHECK(e.violations().size() == v.size());
    }
}

TEST_CASE("stability margin guards the boundary of the stable region") {
    ModelParams p;
    p.mu = {-1e-13, -1.0};
    CHECK(check_constraints(p, 0.0).empty());
    CHECK(has(check_constraints(p), ConstraintKind::UnstableReflection));
    p.mu = {0.0, -1.0};
    CHECK(has(check_constraints(p, 0.0), ConstraintKind::UnstableReflection));
}

TEST_CASE("reflection matrix with nonpositive determinant is unstable") {
    ModelParams p = m0();
    p.refl = {{{1.0, 2.0}, {1.0, 1.0}}};
    CHECK(has(check_constraints(p), ConstraintKind::UnstableReflection));
}

TEST_CASE("validate is idempotent") {
    const auto p = validate(m1());
    const auto q = validate(p);
    CHECK(q.mu == p.mu);
    CHECK(q.sigma == p.sigma);
    CHECK(q.refl == p.refl);
    CHECK(q.stick == p.stick);
}

TEST_CASE("levy exponent") {
    CHECK(levy_exponent(m0(), {-1.0, -1.0}) == doctest::Approx(3.0));
    CHECK(levy_exponent(m0(), {0.0, 0.0}) == 0.0);
}

TEST_CASE("local time rates on the reference models") {
    auto r = local_time_rates(m0()).rates;
    CHECK(r.e_T1 == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(r.e_L1 == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(r.e_L2 == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    const auto rep = local_time_rates(m1());
    CHECK(rep.rates.e_T1 == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(rep.rates.e_L1 == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(rep.rates.e_L2 == doctest::Approx(0.8).epsilon(1e-14));
    // the printed second closed form gives 1.0 here
    CHECK(rep.closed_form_L2 == doctest::Approx(1.0));
    CHECK(rep.rel_discrepancy_L2 == doctest::Approx(0.2));
}

TEST_CASE("local time rates against an independent solve and the first closed form") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 1000; ++i) {
        const auto p = testing_support::random_model(rng);
        const auto rep = local_time_rates(p);
        const auto o = balance_oracle(p);
        CHECK(rep.rates.e_T1 == doctest::Approx(o[0]).epsilon(1e-10));
        CHECK(rep.rates.e_L1 == doctest::Approx(o[1]).epsilon(1e-10));
        CHECK(rep.rates.e_L2 == doctest::Approx(o[2]).epsilon(1e-10));
        CHECK(rep.rel_discrepancy_L1 < 1e-9);
        CHECK(rep.rates.e_T1 + p.stick[0] * rep.rates.e_L1 + p.stick[1] * rep.rates.e_L2 ==
              doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rep.rates.e_T1 > 0.0);
        CHECK(rep.rates.e_T1 <= 1.0);
        CHECK(rep.rates.e_L1 >= 0.0);
        CHECK(rep.rates.e_L2 >= 0.0);
    }
}

TEST_CASE("identity reflection with diagonal covariance gives E[L_i] = -mu_i E[T]") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        const auto p = testing_support::product_form_model(rng);
        const auto r = local_time_rates(p).rates;
        CHECK(r.e_L1 == doctest::Approx(-p.mu[0] * r.e_T1).epsilon(1e-13));
        CHECK(r.e_L2 == doctest::Approx(-p.mu[1] * r.e_T1).epsilon(1e-13));
    }
}

TEST_CASE("substochastic reflection check") {
    CHECK(reflection_is_substochastic(identity2()));
    CHECK(reflection_is_substochastic({{{1.0, -0.5}, {-0.5, 1.0}}}));
    CHECK_FALSE(reflection_is_substochastic({{{1.0, -1.5}, {-0.5, 1.0}}}));
    CHECK_FALSE(reflection_is_substochastic({{{1.0, 0.5}, {-0.5, 1.0}}}));
}

TEST_CASE("coordinate swap is an involution") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        const auto p = testing_support::random_model(rng);
        const auto q = swap_coordinates(swap_coordinates(p));
        CHECK(q.mu == p.mu);
        CHECK(q.sigma == p.sigma);
        CHECK(q.refl == p.refl);
        CHECK(q.stick == p.stick);
        const auto s = swap_coordinates(p);
        CHECK(s.refl[0][1] == p.refl[1][0]);
        CHECK(s.sigma[0][0] == p.sigma[1][1]);
    }
}
