#include "stickytail/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stickytail {

std::string_view to_string(Dominant d) {
    switch (d) {
        case Dominant::XStar: return "x_star";
        case Dominant::XTilde: return "x_tilde";
        case Dominant::BranchPoint: return "x2";
        case Dominant::MarginalZero: return "x_gamma3";
        case Dominant::DirectionalZero: return "x_gamma";
    }
    return "unknown";
}

bool is_admissible_exponent(double p) { return p == -1.5 || p == -0.5 || p == 0.0 || p == 1.0; }

DirectionalQuery::DirectionalQuery(Vec2 direction) {
    if (!(direction[0] >= 0.0) || !(direction[1] >= 0.0) || !(direction[0] > 0.0 || direction[1] > 0.0) ||
        !std::isfinite(direction[0]) || !std::isfinite(direction[1]))
        throw Error(ErrorCode::InvalidArgument, "direction must be nonnegative and nonzero");
    const double m = std::max(direction[0], direction[1]);
    u_bar_ = {direction[0] / m, direction[1] / m};
}

namespace {

// Tie-aware comparisons on extended reals; infinities never tie.
struct Ties {
    double eps;
    bool eq(double a, double b) const {
        if (!std::isfinite(a) || !std::isfinite(b)) return false;
        return std::abs(a - b) <= eps * std::max(std::abs(a), std::abs(b));
    }
    bool lt(double a, double b) const { return a < b && !eq(a, b); }
};

TailAsymptotic make(double alpha, double p, std::string regime, Dominant d) {
    return {alpha, p, std::move(regime), d, false};
}

// Boundary table applied to the triple (x*, x~, x2) of `params`.
TailAsymptotic boundary_table(const SingularityCandidates& c, const Ties& t, const std::string& tag) {
    const double xs = c.x_star, xt = c.x_tilde, b = c.x2;
    if (t.eq(xs, xt) && t.eq(xs, b)) return make(b, 0.0, tag + ".case1(triple)", Dominant::XStar);
    if (t.eq(xs, xt) && t.lt(xs, b)) return make(xs, 1.0, tag + ".case4", Dominant::XStar);
    if (t.eq(xs, b) && t.lt(b, xt)) return make(b, -0.5, tag + ".case2", Dominant::XStar);
    if (t.eq(xt, b) && t.lt(b, xs)) return make(b, -0.5, tag + ".case2", Dominant::XTilde);
    if (t.lt(b, std::min(xs, xt))) return make(b, -1.5, tag + ".case3", Dominant::BranchPoint);
    if (t.lt(xs, std::min(xt, b))) return make(xs, 0.0, tag + ".case1", Dominant::XStar);
    if (t.lt(xt, std::min(xs, b))) return make(xt, 0.0, tag + ".case1", Dominant::XTilde);
    throw Error(ErrorCode::UnreachableRegime, tag + ": candidate ordering matches no boundary case");
}

// Decide between Y0(c) = target (simple pole, p = 0) and Y1(c) = target (double pole, p = 1).
double pole_order_split(double c, double target, const ModelParams& p, const Ties& t, const std::string& tag) {
    const double tol = t.eps * (1.0 + std::abs(c));
    const bool lower = std::abs(y_branch(c, Branch::Lower, p) - target) <= tol;
    const bool upper = std::abs(y_branch(c, Branch::Upper, p) - target) <= tol;
    if (lower == upper) {
        std::ostringstream msg;
        msg << tag << ": branch sub-case undecided at " << c << " (lower=" << lower << ", upper=" << upper << ")";
        throw Error(ErrorCode::InconsistentSubcase, msg.str());
    }
    return lower ? 0.0 : 1.0;
}

// Marginal table for axis 1 of `params`.
TailAsymptotic marginal_axis1(const ModelParams& p, const ClassifierOptions& o) {
    const Ties t{o.eps_eq};
    const auto c = singularity_candidates(p, o.tol_accept);
    if (p.mu[0] >= 0.0) {
        auto r = boundary_table(c, t, "marginal(mu>=0)->boundary");
        return r;
    }
    const double xg = -2.0 * p.mu[0] / p.sigma[0][0];
    const double z = std::min(c.x_star, c.x_tilde);
    const Dominant zd = c.x_star <= c.x_tilde ? Dominant::XStar : Dominant::XTilde;
    const double b = c.x2;
    const double m = std::min(z, xg);
    const bool same = t.eq(c.x_star, c.x_tilde);

    if (t.lt(m, b)) {
        if (t.eq(xg, z)) {
            const double pw = pole_order_split(z, 0.0, p, t, "marginal.case2");
            return make(xg, pw, pw == 0.0 ? "marginal.case2-1" : "marginal.case2-2", Dominant::MarginalZero);
        }
        if (same && t.lt(z, xg)) return make(z, 1.0, "marginal.case1-1", zd);
        if (same) return make(xg, 0.0, "marginal.case1-2", Dominant::MarginalZero);
        return make(m, 0.0, "marginal.case1-3", xg < z ? Dominant::MarginalZero : zd);
    }
    if (t.eq(m, b)) {
        if (t.eq(z, xg)) return make(b, 0.0, "marginal.case3-1", Dominant::BranchPoint);
        if (t.lt(xg, z)) return make(b, 0.0, "marginal.case3-2", Dominant::MarginalZero);
        if (same) return make(b, 0.0, "marginal.case3-4", Dominant::BranchPoint);
        return make(b, -0.5, "marginal.case3-3", Dominant::BranchPoint);
    }
    return make(b, -1.5, "marginal.case4", Dominant::BranchPoint);
}

// Directional table assuming the face-2 boundary term dominates (beta1 > beta2).
TailAsymptotic directional_face2(const ModelParams& p, const Vec2& u, double xg, const ClassifierOptions& o) {
    const Ties t{o.eps_eq};
    const auto c = singularity_candidates(p, o.tol_accept);
    const double z0 = std::min(c.x_star, c.x_tilde) / u[0];
    const Dominant zd = c.x_star <= c.x_tilde ? Dominant::XStar : Dominant::XTilde;
    const double b = c.x2 / u[0];
    const double m = std::min(z0, xg);
    const bool same = t.eq(c.x_star, c.x_tilde);

    if (t.lt(m, b)) {
        if (t.eq(z0, xg)) {
            const double pw = pole_order_split(z0 * u[0], xg * u[1], p, t, "direction.case2");
            return make(xg, pw, pw == 0.0 ? "direction.case2-1" : "direction.case2-2", Dominant::DirectionalZero);
        }
        if (same && t.lt(z0, xg)) return make(z0, 1.0, "direction.case1-1", zd);
        if (same) return make(xg, 0.0, "direction.case1-2", Dominant::DirectionalZero);
        return make(m, 0.0, "direction.case1-3", xg < z0 ? Dominant::DirectionalZero : zd);
    }
    if (t.eq(m, b)) {
        if (t.eq(z0, xg))
            throw Error(ErrorCode::UnreachableRegime, "direction.case3-1 requires equal one-sided rates");
        if (t.lt(xg, z0)) return make(b, 0.0, "direction.case3-2", Dominant::DirectionalZero);
        if (same) return make(b, 0.0, "direction.case3-4", Dominant::BranchPoint);
        return make(b, -0.5, "direction.case3-3", Dominant::BranchPoint);
    }
    return make(b, -1.5, "direction.case4", Dominant::BranchPoint);
}

TailAsymptotic mirrored(TailAsymptotic r) {
    r.regime += "(swapped)";
    return r;
}

}  // namespace

TailAsymptotic boundary_from_candidates(const SingularityCandidates& c, const ClassifierOptions& opts) {
    if (!std::isfinite(c.x2)) throw Error(ErrorCode::NoFiniteCandidate, "branch point is not finite");
    return boundary_table(c, Ties{opts.eps_eq}, "boundary");
}

TailAsymptotic classify_boundary(int face, const ModelParams& params, const ClassifierOptions& opts) {
    if (face != 1 && face != 2) throw Error(ErrorCode::InvalidArgument, "face must be 1 or 2");
    const ModelParams p = face == 2 ? params : swap_coordinates(params);
    const auto c = singularity_candidates(p, opts.tol_accept);
    if (!std::isfinite(c.x2)) throw Error(ErrorCode::NoFiniteCandidate, "branch point is not finite");
    auto r = boundary_table(c, Ties{opts.eps_eq}, face == 2 ? "boundary2" : "boundary1");
    return r;
}

TailAsymptotic classify_marginal(int axis, const ModelParams& params, const ClassifierOptions& opts) {
    if (axis != 1 && axis != 2) throw Error(ErrorCode::InvalidArgument, "axis must be 1 or 2");
    if (axis == 1) return marginal_axis1(params, opts);
    return mirrored(marginal_axis1(swap_coordinates(params), opts));
}

TailAsymptotic classify_direction(const DirectionalQuery& q, const ModelParams& params,
                                  const ClassifierOptions& opts) {
    const Vec2 u = q.u_bar();
    if (u[1] == 0.0) return classify_marginal(1, params, opts);
    if (u[0] == 0.0) return classify_marginal(2, params, opts);

    const Ties t{opts.eps_eq};
    const auto face1 = classify_boundary(1, params, opts);
    const auto face2 = classify_boundary(2, params, opts);
    const double beta1 = face1.alpha / u[1];
    const double beta2 = face2.alpha / u[0];
    const double xg = -2.0 * dot(u, params.mu) / quad_form(params.sigma, u);

    if (!(xg > 0.0)) {
        // The zero of gamma(lambda) is not a pole: only the boundary terms matter.
        TailAsymptotic r;
        if (t.eq(beta1, beta2)) {
            r = face1.p >= face2.p ? face1 : face2;
            r.alpha = std::min(beta1, beta2);
            r.experimental = true;
            r.regime = "direction(boundary,equal-rates):" + r.regime;
        } else if (beta2 < beta1) {
            r = face2;
            r.alpha = beta2;
            r.regime = "direction(boundary):" + r.regime;
        } else {
            r = face1;
            r.alpha = beta1;
            r.regime = "direction(boundary):" + r.regime;
        }
        return r;
    }

    const ModelParams sp = swap_coordinates(params);
    const Vec2 su = swapped(u);
    const double sxg = -2.0 * dot(su, sp.mu) / quad_form(sp.sigma, su);
    if (t.lt(beta2, beta1)) return directional_face2(params, u, xg, opts);
    if (t.lt(beta1, beta2)) return mirrored(directional_face2(sp, su, sxg, opts));

    // Equal one-sided rates: keep the larger exponent at the common singularity.
    auto a = directional_face2(params, u, xg, opts);
    auto b = mirrored(directional_face2(sp, su, sxg, opts));
    TailAsymptotic r = a.p >= b.p ? a : b;
    r.alpha = std::min(a.alpha, b.alpha);
    r.experimental = true;
    r.regime = "direction(equal-rates):" + r.regime;
    return r;
}

std::pair<TailAsymptotic, TailAsymptotic> joint_tail_params(const ModelParams& params,
                                                            const ClassifierOptions& opts) {
    if (!reflection_is_substochastic(params.refl))
        throw Error(ErrorCode::ReflectionNotSubstochastic,
                    "reflection matrix is not of the form I - P^T with P substochastic, spectral radius < 1");
    return {classify_marginal(1, params, opts), classify_marginal(2, params, opts)};
}

}  // namespace stickytail
