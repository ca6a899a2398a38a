#pragma once

#include <string>
#include <utility>

#include "stickytail/kernel.hpp"

namespace stickytail {

/// Which singularity set the decay rate.
enum class Dominant { XStar, XTilde, BranchPoint, MarginalZero, DirectionalZero };

std::string_view to_string(Dominant d);

/// Survival ~ K t^p exp(-alpha t). `p` is one of -3/2, -1/2, 0, 1.
struct TailAsymptotic {
    double alpha = 0.0;
    double p = 0.0;
    std::string regime;
    Dominant dominant = Dominant::BranchPoint;
    bool experimental = false;
};

bool is_admissible_exponent(double p);

/// Direction in the closed positive quadrant, rescaled so its largest component is 1.
class DirectionalQuery {
public:
    explicit DirectionalQuery(Vec2 direction);
    const Vec2& u_bar() const noexcept { return u_bar_; }

private:
    Vec2 u_bar_;
};

struct ClassifierOptions {
    double eps_eq = 1e-8;       // relative tolerance for candidate ties
    double tol_accept = 1e-8;   // x~ branch-membership tolerance
};

/// The boundary case table applied to an explicit (x*, x~, x2) triple.
TailAsymptotic boundary_from_candidates(const SingularityCandidates& c, const ClassifierOptions& opts = {});

/// Decay of the boundary measure on face `face` (1 or 2). Face 2 is governed by
/// (x*, x~, x2); face 1 by the same triple of the coordinate-swapped model.
TailAsymptotic classify_boundary(int face, const ModelParams& params, const ClassifierOptions& opts = {});

/// Decay of P(Z_axis > t) for axis 1 or 2.
TailAsymptotic classify_marginal(int axis, const ModelParams& params, const ClassifierOptions& opts = {});

/// Decay of P(<u_bar, Z> > t).
TailAsymptotic classify_direction(const DirectionalQuery& q, const ModelParams& params,
                                  const ClassifierOptions& opts = {});

/// Marginal tails feeding the product-form joint tail. Requires a substochastic
/// reflection (R = I - P^T); throws ReflectionNotSubstochastic otherwise.
std::pair<TailAsymptotic, TailAsymptotic> joint_tail_params(const ModelParams& params,
                                                            const ClassifierOptions& opts = {});

}  // namespace stickytail
