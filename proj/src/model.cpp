#include "stickytail/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stickytail {

std::string_view to_string(ConstraintKind kind) {
    switch (kind) {
        case ConstraintKind::NonPositiveDefiniteSigma: return "NonPositiveDefiniteSigma";
        case ConstraintKind::UnstableReflection: return "UnstableReflection";
        case ConstraintKind::DegenerateCorrelation: return "DegenerateCorrelation";
        case ConstraintKind::NonPositiveStickiness: return "NonPositiveStickiness";
    }
    return "Unknown";
}

namespace {

std::string join_violations(const std::vector<ConstraintViolation>& violations) {
    std::ostringstream out;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) out << "; ";
        out << to_string(violations[i].kind) << " (" << violations[i].detail << ")";
    }
    return out.str();
}

bool all_finite(const ModelParams& p) {
    for (double v : {p.mu[0], p.mu[1], p.stick[0], p.stick[1]})
        if (!std::isfinite(v)) return false;
    for (const auto& m : {p.sigma, p.refl})
        for (const auto& row : m)
            for (double v : row)
                if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace

ModelError::ModelError(std::vector<ConstraintViolation> violations)
    : Error(ErrorCode::ValidationError, join_violations(violations)),
      violations_(std::move(violations)) {}

double correlation(const ModelParams& params) {
    const auto& s = params.sigma;
    return s[0][1] / std::sqrt(s[0][0] * s[1][1]);
}

double levy_exponent(const ModelParams& params, const Vec2& theta) {
    return dot(theta, params.mu) + 0.5 * quad_form(params.sigma, theta);
}

ModelParams swap_coordinates(const ModelParams& params) {
    return {swapped(params.mu), swapped(params.sigma), swapped(params.refl), swapped(params.stick)};
}

std::vector<ConstraintViolation> check_constraints(const ModelParams& p, double eps_stab) {
    std::vector<ConstraintViolation> out;
    if (!all_finite(p)) {
        out.push_back({ConstraintKind::NonPositiveDefiniteSigma, "non-finite model entries"});
        return out;
    }
    const auto& s = p.sigma;
    const auto& r = p.refl;

    const bool symmetric = s[0][1] == s[1][0];
    const double det_s = det(s);
    if (!symmetric || s[0][0] <= 0.0 || s[1][1] <= 0.0 || det_s <= 0.0) {
        std::ostringstream msg;
        msg << "sigma must be symmetric positive definite (sigma11=" << s[0][0]
            << ", sigma22=" << s[1][1] << ", det=" << det_s
            << (symmetric ? "" : ", asymmetric") << ")";
        out.push_back({ConstraintKind::NonPositiveDefiniteSigma, msg.str()});
    }

    const double det_r = det(r);
    const double s1 = r[1][1] * p.mu[0] - r[0][1] * p.mu[1];
    const double s2 = r[0][0] * p.mu[1] - r[1][0] * p.mu[0];
    const bool nonsingular_ok = r[0][0] > 0.0 && r[1][1] > 0.0 && det_r > 0.0;
    const bool drift_ok = s1 < -eps_stab && s2 < -eps_stab;
    if (!nonsingular_ok || !drift_ok) {
        std::ostringstream msg;
        msg << "need r11>0, r22>0, det(R)>0, r22*mu1-r12*mu2<0, r11*mu2-r21*mu1<0; got r11="
            << r[0][0] << ", r22=" << r[1][1] << ", det=" << det_r << ", " << s1 << ", " << s2;
        out.push_back({ConstraintKind::UnstableReflection, msg.str()});
    }
    if (nonsingular_ok) {
        // R^{-1} mu < 0 must agree with the componentwise form when det(R) > 0.
        const Vec2 rinv_mu{s1 / det_r, s2 / det_r};
        const bool general_ok = rinv_mu[0] < 0.0 && rinv_mu[1] < 0.0;
        if (general_ok != (s1 < 0.0 && s2 < 0.0))
            throw Error(ErrorCode::ValidationError, "stability forms disagree");
    }

    if (s[0][0] > 0.0 && s[1][1] > 0.0) {
        const double rho = correlation(p);
        if (!(rho < 1.0)) {
            std::ostringstream msg;
            msg << "correlation must be < 1, got " << rho;
            out.push_back({ConstraintKind::DegenerateCorrelation, msg.str()});
        }
    }

    if (!(p.stick[0] > 0.0) || !(p.stick[1] > 0.0)) {
        std::ostringstream msg;
        msg << "stickiness must be positive, got (" << p.stick[0] << ", " << p.stick[1] << ")";
        out.push_back({ConstraintKind::NonPositiveStickiness, msg.str()});
    }
    return out;
}

ModelParams validate(const ModelParams& params, double eps_stab) {
    auto violations = check_constraints(params, eps_stab);
    if (!violations.empty()) throw ModelError(std::move(violations));
    return params;
}

LocalTimeRatesReport local_time_rates(const ModelParams& p) {
    const auto& r = p.refl;
    const auto& mu = p.mu;
    const auto& u = p.stick;

    // Eliminate E[T] = 1 - u1 E[L1] - u2 E[L2]:
    //   (r11 - mu1 u1) L1 + (r12 - mu1 u2) L2 = -mu1
    //   (r21 - mu2 u1) L1 + (r22 - mu2 u2) L2 = -mu2
    const Mat2 a{{{r[0][0] - mu[0] * u[0], r[0][1] - mu[0] * u[1]},
                  {r[1][0] - mu[1] * u[0], r[1][1] - mu[1] * u[1]}}};
    const double d = det(a);
    const double scale = std::abs(a[0][0] * a[1][1]) + std::abs(a[0][1] * a[1][0]);
    if (!(std::abs(d) > 1e-14 * scale))
        throw Error(ErrorCode::SingularSystem, "local-time balance system is singular");

    LocalTimeRatesReport out;
    out.rates.e_L1 = (-mu[0] * a[1][1] + mu[1] * a[0][1]) / d;
    out.rates.e_L2 = (-mu[1] * a[0][0] + mu[0] * a[1][0]) / d;
    out.rates.e_T1 = 1.0 - u[0] * out.rates.e_L1 - u[1] * out.rates.e_L2;

    out.closed_form_L1 =
        (mu[0] * (r[1][1] - mu[1] * u[1]) - mu[1] * (r[0][1] - mu[0] * u[1])) /
        ((r[1][0] - mu[1] * u[0]) * (r[0][1] - u[1] * mu[0]) -
         (r[0][0] - mu[0] * u[0]) * (r[1][1] - mu[1] * u[1]));
    out.closed_form_L2 =
        (mu[0] * (r[1][0] - mu[1] * u[0]) - mu[1] * (r[0][0] - mu[0] * u[0])) /
        ((r[1][1] - mu[1] * u[1]) * (r[0][0] - mu[0] * u[0]) -
         (r[0][1] - mu[1] * u[0]) * (r[1][0] - mu[1] * u[0]));
    auto rel = [](double a_, double b_) {
        return std::abs(a_ - b_) / std::max({std::abs(a_), std::abs(b_), 1e-300});
    };
    out.rel_discrepancy_L1 = rel(out.closed_form_L1, out.rates.e_L1);
    out.rel_discrepancy_L2 = rel(out.closed_form_L2, out.rates.e_L2);
    return out;
}

bool reflection_is_substochastic(const Mat2& refl) {
    const Mat2 p = transpose(Mat2{{{1.0 - refl[0][0], -refl[0][1]}, {-refl[1][0], 1.0 - refl[1][1]}}});
    for (const auto& row : p) {
        if (row[0] < 0.0 || row[1] < 0.0) return false;
        if (row[0] + row[1] > 1.0) return false;
    }
    // Nonnegative 2x2: Perron root from the characteristic polynomial.
    const double tr = p[0][0] + p[1][1];
    const double disc = tr * tr - 4.0 * det(p);
    const double radius = 0.5 * (tr + std::sqrt(std::max(disc, 0.0)));
    return radius < 1.0;
}

}  // namespace stickytail
