#pragma once

#include <string>
#include <vector>

#include "stickytail/error.hpp"
#include "stickytail/linalg.hpp"

namespace stickytail {

/// Parameters of a two-dimensional sticky reflected Brownian motion.
///
/// The underlying reflected process is Z~(t) = X(t) + R L(t) with X a Brownian
/// motion with drift `mu` and covariance `sigma`; the sticky clock is
/// S(t) = t + stick[0] L1(t) + stick[1] L2(t).
struct ModelParams {
    Vec2 mu{};
    Mat2 sigma = identity2();
    Mat2 refl = identity2();
    Vec2 stick{1.0, 1.0};
};

enum class ConstraintKind {
    NonPositiveDefiniteSigma,
    UnstableReflection,
    DegenerateCorrelation,
    NonPositiveStickiness,
};

std::string_view to_string(ConstraintKind kind);

struct ConstraintViolation {
    ConstraintKind kind;
    std::string detail;
};

/// Default margin for the strict stability inequalities.
inline constexpr double kStabilityMargin = 1e-12;

/// Every violated standing assumption, in a fixed order. Empty iff valid.
std::vector<ConstraintViolation> check_constraints(const ModelParams& params,
                                                   double eps_stab = kStabilityMargin);

class ModelError : public Error {
public:
    explicit ModelError(std::vector<ConstraintViolation> violations);
    const std::vector<ConstraintViolation>& violations() const noexcept { return violations_; }

private:
    std::vector<ConstraintViolation> violations_;
};

/// Returns `params` unchanged when valid; throws ModelError listing all violations otherwise.
ModelParams validate(const ModelParams& params, double eps_stab = kStabilityMargin);

double correlation(const ModelParams& params);

/// Levy exponent of X(1): <theta, mu> + <theta, sigma theta> / 2.
double levy_exponent(const ModelParams& params, const Vec2& theta);

/// Relabels coordinates 1 <-> 2 in every piece of model data.
ModelParams swap_coordinates(const ModelParams& params);

struct LocalTimeRates {
    double e_T1 = 0.0;
    double e_L1 = 0.0;
    double e_L2 = 0.0;
};

struct LocalTimeRatesReport {
    LocalTimeRates rates;
    // Cramer-rule closed forms as printed; the second one is known to disagree.
    double closed_form_L1 = 0.0;
    double closed_form_L2 = 0.0;
    double rel_discrepancy_L1 = 0.0;
    double rel_discrepancy_L2 = 0.0;
};

/// Solves the stationary mean-drift balance
///   -mu_i E[T(1)] = sum_j r_ij E[L_j(T(1))],   E[T(1)] + <u, E[L(T(1))]> = 1.
LocalTimeRatesReport local_time_rates(const ModelParams& params);

/// R = I - P^T with P entrywise nonnegative, substochastic rows and spectral radius < 1.
bool reflection_is_substochastic(const Mat2& refl);

}  // namespace stickytail
