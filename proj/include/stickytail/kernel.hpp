#pragma once

#include <limits>

#include "stickytail/model.hpp"

namespace stickytail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// The kernel gamma(x, y) = <(x,y), mu> + <(x,y), sigma (x,y)> / 2 written as a
/// quadratic in y (a y^2 + b(x) y + c(x)) and, mirrored, as a quadratic in x.
struct KernelForm {
    double a = 0.0;       // sigma22 / 2
    Vec2 b_lin{};         // b(x) = b_lin[0] + b_lin[1] x
    Vec2 c_quad{};        // c(x) = c_quad[0] x + c_quad[1] x^2
    double a_mirror = 0.0;  // sigma11 / 2
    Vec2 b_mirror{};        // b~(y) = b_mirror[0] + b_mirror[1] y
    Vec2 c_mirror{};        // c~(y) = c_mirror[0] y + c_mirror[1] y^2

    double b(double x) const { return b_lin[0] + b_lin[1] * x; }
    double c(double x) const { return c_quad[0] * x + c_quad[1] * x * x; }
    double b_tilde(double y) const { return b_mirror[0] + b_mirror[1] * y; }
    double c_tilde(double y) const { return c_mirror[0] * y + c_mirror[1] * y * y; }
};

KernelForm kernel_form(const ModelParams& params);

double kernel_eval(double x, double y, const ModelParams& params);

/// D1(x) = b(x)^2 - 4 a c(x), discriminant of the quadratic in y.
double discriminant_x(double x, const ModelParams& params);
/// D2(y) = b~(y)^2 - 4 a~ c~(y), discriminant of the quadratic in x.
double discriminant_y(double y, const ModelParams& params);

struct BranchPoints {
    double x1 = 0.0, x2 = 0.0;
    double y1 = 0.0, y2 = 0.0;
};

BranchPoints branch_points(const ModelParams& params);

enum class Branch { Lower = 0, Upper = 1 };

/// Y0 (Lower) or Y1 (Upper): the real roots in y of gamma(x, .) = 0.
/// Throws OutsideBranchCut when D1(x) < 0 beyond round-off.
double y_branch(double x, Branch which, const ModelParams& params);
/// X0 (Lower) or X1 (Upper): the real roots in x of gamma(., y) = 0.
double x_branch(double y, Branch which, const ModelParams& params);

struct FacePolys {
    double gamma1 = 0.0;  // x r11 + y r21
    double gamma2 = 0.0;  // x r12 + y r22
};

FacePolys face_polys(double x, double y, const ModelParams& params);

struct RootOptions {
    double rel_tol = 1e-10;
    int max_iter = 200;
};

/// Zero of gamma2(z, Y0(z)) on (0, x2], or +inf when gamma2(x2, Y0(x2)) < 0.
double find_x_star(const ModelParams& params, const RootOptions& opts = {});

struct YStarXTilde {
    double y_star = kInf;
    double x_tilde_candidate = kInf;  // X1(y_star)
    double x_tilde = kInf;            // candidate if Y0(candidate) = y_star, else +inf
};

YStarXTilde find_y_star_x_tilde(const ModelParams& params, double tol_accept = 1e-8,
                                const RootOptions& opts = {});

struct SingularityCandidates {
    double x_star = kInf;
    double y_star = kInf;
    double x_tilde = kInf;
    double x2 = 0.0;
};

SingularityCandidates singularity_candidates(const ModelParams& params, double tol_accept = 1e-8);

/// Closed-form expressions as printed next to the definitional quantities, kept for
/// comparison only. The `*_ray` values are the intersections of the kernel ellipse
/// with the lines gamma2 = 0 / gamma1 = 0, which are what those closed forms aim at.
struct KernelCrossChecks {
    double x2_closed_form = 0.0;
    double x_star_closed_form = 0.0;
    double y_star_closed_form = 0.0;
    double x_star_ray = 0.0;
    double y_star_ray = 0.0;
};

KernelCrossChecks kernel_cross_checks(const ModelParams& params);

}  // namespace stickytail
