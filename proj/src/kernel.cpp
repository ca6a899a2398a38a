#include "stickytail/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace stickytail {

namespace {

// `scale` bounds the size of the terms that cancel in the discriminant.
double root_of(double a, double b, double c, double scale, Branch which) {
    double disc = b * b - 4.0 * a * c;
    if (std::abs(disc) <= 16.0 * std::numeric_limits<double>::epsilon() * scale) {
        disc = 0.0;  // coalesced branches
    } else if (disc < 0.0) {
        if (disc >= -1e-12 * scale) {
            disc = 0.0;
        } else {
            std::ostringstream msg;
            msg << "discriminant " << disc << " < 0";
            throw Error(ErrorCode::OutsideBranchCut, msg.str());
        }
    }
    const double s = std::sqrt(disc);
    return which == Branch::Lower ? (-b - s) / (2.0 * a) : (-b + s) / (2.0 * a);
}

double term_scale(double a, double b0, double b1, double c0, double c1, double t) {
    const double bb = std::abs(b0) + std::abs(b1 * t);
    return bb * bb + 4.0 * a * (std::abs(c0 * t) + std::abs(c1 * t * t));
}

struct QuadraticRoots {
    double lo, hi;
};

// Roots of A t^2 + B t + C with A < 0 and a nonnegative discriminant.
QuadraticRoots discriminant_roots(double A, double B, double C) {
    const double scale = std::max({std::abs(A), std::abs(B), std::abs(C), 1e-300});
    if (std::abs(A) <= 1e-14 * scale)
        throw Error(ErrorCode::DegenerateDiscriminant, "leading coefficient of the discriminant vanishes");
    const double disc = std::max(B * B - 4.0 * A * C, 0.0);
    const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
    double r1 = q / A;
    double r2 = q != 0.0 ? C / q : r1;
    if (r1 > r2) std::swap(r1, r2);
    return {r1, r2};
}

// First zero of g on (0, upper], given g(upper) >= 0 and g < 0 immediately to the right of 0.
template <class F>
double first_root(F&& g, double upper, const RootOptions& opts, const char* name) {
    const double g_upper = g(upper);
    constexpr int kScan = 512;
    double lo = upper * 1e-9;
    double g_lo = g(lo);
    if (!(g_lo < 0.0)) {
        std::ostringstream msg;
        msg << name << ": no negative value near 0 (g(" << lo << ")=" << g_lo << ")";
        throw Error(ErrorCode::BracketFailure, msg.str());
    }
    double hi = upper;
    double g_hi = g_upper;
    for (int k = 1; k <= kScan; ++k) {
        const double z = upper * static_cast<double>(k) / kScan;
        if (z <= lo) continue;
        const double gz = g(z);
        if (gz >= 0.0) {
            hi = z;
            g_hi = gz;
            break;
        }
        lo = z;
        g_lo = gz;
    }
    if (!(g_hi >= 0.0)) {
        std::ostringstream msg;
        msg << name << ": sign condition holds but no bracket found";
        throw Error(ErrorCode::BracketFailure, msg.str());
    }
    if (g_hi == 0.0) return hi;

    // Bisection to a coarse bracket, then safeguarded secant steps.
    for (int it = 0; it < opts.max_iter; ++it) {
        const double width = hi - lo;
        double mid;
        if (width > 1e-6 * (1.0 + std::abs(hi))) {
            mid = 0.5 * (lo + hi);
        } else {
            mid = hi - g_hi * (hi - lo) / (g_hi - g_lo);
            if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
        }
        const double gm = g(mid);
        if (gm == 0.0) return mid;
        if (gm < 0.0) {
            lo = mid;
            g_lo = gm;
        } else {
            hi = mid;
            g_hi = gm;
        }
        const double x = std::abs(g_lo) < std::abs(g_hi) ? lo : hi;
        const double gx = std::min(std::abs(g_lo), std::abs(g_hi));
        if (hi - lo <= opts.rel_tol * (1.0 + std::abs(x)) && gx <= 1e-9 * (1.0 + std::abs(x)))
            return x;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) return x;
    }
    return std::abs(g_lo) < std::abs(g_hi) ? lo : hi;
}

}  // namespace

KernelForm kernel_form(const ModelParams& p) {
    const auto& s = p.sigma;
    KernelForm k;
    k.a = 0.5 * s[1][1];
    k.b_lin = {p.mu[1], s[0][1]};
    k.c_quad = {p.mu[0], 0.5 * s[0][0]};
    k.a_mirror = 0.5 * s[0][0];
    k.b_mirror = {p.mu[0], s[0][1]};
    k.c_mirror = {p.mu[1], 0.5 * s[1][1]};
    return k;
}

double kernel_eval(double x, double y, const ModelParams& p) {
    const auto& s = p.sigma;
    return x * p.mu[0] + y * p.mu[1] + 0.5 * s[0][0] * x * x + s[0][1] * x * y + 0.5 * s[1][1] * y * y;
}

double discriminant_x(double x, const ModelParams& p) {
    const auto k = kernel_form(p);
    const double b = k.b(x);
    return b * b - 4.0 * k.a * k.c(x);
}

double discriminant_y(double y, const ModelParams& p) {
    const auto k = kernel_form(p);
    const double b = k.b_tilde(y);
    return b * b - 4.0 * k.a_mirror * k.c_tilde(y);
}

BranchPoints branch_points(const ModelParams& p) {
    const auto& s = p.sigma;
    const double lead = s[0][1] * s[0][1] - s[0][0] * s[1][1];
    // D1(x) = lead x^2 + 2 (s12 mu2 - s22 mu1) x + mu2^2, and its mirror.
    const auto xs = discriminant_roots(lead, 2.0 * (s[0][1] * p.mu[1] - s[1][1] * p.mu[0]), p.mu[1] * p.mu[1]);
    const auto ys = discriminant_roots(lead, 2.0 * (s[0][1] * p.mu[0] - s[0][0] * p.mu[1]), p.mu[0] * p.mu[0]);
    return {xs.lo, xs.hi, ys.lo, ys.hi};
}

double y_branch(double x, Branch which, const ModelParams& p) {
    const auto k = kernel_form(p);
    return root_of(k.a, k.b(x), k.c(x), term_scale(k.a, k.b_lin[0], k.b_lin[1], k.c_quad[0], k.c_quad[1], x),
                   which);
}

double x_branch(double y, Branch which, const ModelParams& p) {
    const auto k = kernel_form(p);
    return root_of(k.a_mirror, k.b_tilde(y), k.c_tilde(y),
                   term_scale(k.a_mirror, k.b_mirror[0], k.b_mirror[1], k.c_mirror[0], k.c_mirror[1], y), which);
}

FacePolys face_polys(double x, double y, const ModelParams& p) {
    const auto& r = p.refl;
    return {x * r[0][0] + y * r[1][0], x * r[0][1] + y * r[1][1]};
}

double find_x_star(const ModelParams& p, const RootOptions& opts) {
    const double x2 = branch_points(p).x2;
    auto g = [&](double z) { return face_polys(z, y_branch(z, Branch::Lower, p), p).gamma2; };
    if (g(x2) < 0.0) return kInf;
    return first_root(g, x2, opts, "x_star");
}

YStarXTilde find_y_star_x_tilde(const ModelParams& p, double tol_accept, const RootOptions& opts) {
    YStarXTilde out;
    const auto bp = branch_points(p);
    auto h = [&](double y) { return face_polys(x_branch(y, Branch::Lower, p), y, p).gamma1; };
    if (h(bp.y2) < 0.0) return out;
    out.y_star = first_root(h, bp.y2, opts, "y_star");

    const double candidate = x_branch(out.y_star, Branch::Upper, p);
    out.x_tilde_candidate = candidate;
    if (!(candidate > 0.0) || candidate > bp.x2 * (1.0 + 1e-12)) return out;
    const double xc = std::min(candidate, bp.x2);
    const double y0 = y_branch(xc, Branch::Lower, p);
    if (std::abs(y0 - out.y_star) <= tol_accept * (1.0 + std::abs(out.y_star))) out.x_tilde = xc;
    return out;
}

SingularityCandidates singularity_candidates(const ModelParams& p, double tol_accept) {
    SingularityCandidates c;
    c.x2 = branch_points(p).x2;
    c.x_star = find_x_star(p);
    const auto yt = find_y_star_x_tilde(p, tol_accept);
    c.y_star = yt.y_star;
    c.x_tilde = yt.x_tilde;
    return c;
}

KernelCrossChecks kernel_cross_checks(const ModelParams& p) {
    const auto& s = p.sigma;
    const auto& r = p.refl;
    const auto& mu = p.mu;
    KernelCrossChecks out;
    const double delta = std::pow(mu[1] * s[0][1] - s[1][1] * mu[0], 2) -
                         (s[0][1] * s[0][1] - s[0][0] * s[0][1]) * mu[1] * mu[1];
    out.x2_closed_form = (2.0 * (s[0][1] * mu[1] - s[1][1] * mu[0]) + std::sqrt(delta)) /
                         (2.0 * (s[0][0] * s[1][1] - s[0][1] * s[0][1]));
    out.x_star_closed_form = (2.0 * r[0][0] * r[1][1] * mu[1] - 2.0 * r[1][1] * r[1][1] * mu[0]) /
                             (s[1][1] * r[0][1] * r[0][1] - 2.0 * r[0][0] * r[1][1] * s[0][1] +
                              r[1][1] * r[1][1] * s[0][0]);
    out.y_star_closed_form = (2.0 * r[0][0] * r[1][0] * mu[1] - 2.0 * r[0][0] * r[0][0] * mu[0]) /
                             (r[1][0] * r[1][0] * s[0][0] - 2.0 * r[0][0] * r[1][0] * s[0][1] +
                              s[1][1] * r[0][0] * r[0][0]);
    out.x_star_ray = (2.0 * r[0][1] * r[1][1] * mu[1] - 2.0 * r[1][1] * r[1][1] * mu[0]) /
                     (s[1][1] * r[0][1] * r[0][1] - 2.0 * r[0][1] * r[1][1] * s[0][1] +
                      r[1][1] * r[1][1] * s[0][0]);
    out.y_star_ray = (2.0 * r[0][0] * r[1][0] * mu[0] - 2.0 * r[0][0] * r[0][0] * mu[1]) /
                     (r[1][0] * r[1][0] * s[0][0] - 2.0 * r[0][0] * r[1][0] * s[0][1] +
                      s[1][1] * r[0][0] * r[0][0]);
    return out;
}

}  // namespace stickytail
