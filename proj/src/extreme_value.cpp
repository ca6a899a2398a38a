#include "stickytail/extreme_value.hpp"

#include <cmath>
#include <sstream>

namespace stickytail {

double gumbel_cdf(double x) { return std::exp(-std::exp(-x)); }

EvNorming ev_norming(double n, const TailAsymptotic& tail, double k) {
    if (!(n >= 3.0)) throw Error(ErrorCode::BlockTooSmall, "block size must be at least 3");
    if (!(k > 0.0)) throw Error(ErrorCode::NonpositiveCoefficient, "tail coefficient must be positive");
    if (!(tail.alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "decay rate must be positive");
    const double log_n = std::log(n);
    EvNorming out;
    out.n = n;
    out.a_n = 1.0 / tail.alpha;
    out.b_n = (log_n + tail.p * std::log(log_n / tail.alpha) + std::log(k)) / tail.alpha;
    return out;
}

JointTailModel make_joint_tail_model(const TailAsymptotic& axis1, const TailAsymptotic& axis2,
                                     std::optional<Estimate> k_hat) {
    if (!(axis1.alpha > 0.0) || !(axis2.alpha > 0.0))
        throw Error(ErrorCode::InvalidArgument, "decay rates must be positive");
    if (!is_admissible_exponent(axis1.p) || !is_admissible_exponent(axis2.p))
        throw Error(ErrorCode::InvalidArgument, "power exponents must be one of -3/2, -1/2, 0, 1");
    return {axis1.alpha, axis2.alpha, axis1.p, axis2.p, k_hat};
}

double joint_tail_eval(double x, double y, const JointTailModel& m) {
    if (!m.k_hat) throw Error(ErrorCode::MissingCoefficient, "joint tail coefficient has not been estimated");
    if (!(x > 0.0) || !(y > 0.0)) throw Error(ErrorCode::InvalidArgument, "joint tail needs x > 0 and y > 0");
    return m.k_hat->value * std::pow(x, m.p1) * std::pow(y, m.p2) * std::exp(-m.alpha1 * x - m.alpha2 * y);
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials) {
    if (trials == 0) return {0.0, 1.0};
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double ph = static_cast<double>(successes) / n;
    const double denom = 1.0 + z * z / n;
    const double centre = (ph + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(ph * (1.0 - ph) / n + z * z / (4.0 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

IndependenceCurve independence_diagnostic(std::span<const Vec2> samples, std::span<const double> t_grid) {
    if (samples.size() < kMinIndependenceSamples) {
        std::ostringstream msg;
        msg << "need at least " << kMinIndependenceSamples << " samples, got " << samples.size();
        throw Error(ErrorCode::InsufficientSamples, msg.str());
    }
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        if (!(t_grid[i] > 0.0) || (i > 0 && !(t_grid[i] > t_grid[i - 1])))
            throw Error(ErrorCode::InvalidArgument, "t grid must be positive and strictly increasing");

    IndependenceCurve out;
    for (double t : t_grid) {
        std::size_t cond = 0, joint = 0;
        for (const auto& s : samples) {
            if (s[0] > t) {
                ++cond;
                if (s[1] > t) ++joint;
            }
        }
        if (cond < kMinExceedances) {
            out.truncated = true;
            break;
        }
        const auto [lo, hi] = wilson_interval(joint, cond);
        out.points.push_back({t, static_cast<double>(joint) / static_cast<double>(cond), lo, hi, cond, joint});
    }
    if (out.points.empty())
        throw Error(ErrorCode::InsufficientExceedances, "fewer than 50 exceedances at the first grid point");
    out.decreasing = true;
    for (std::size_t i = 1; i < out.points.size(); ++i)
        if (out.points[i].lower > out.points[i - 1].upper) out.decreasing = false;
    if (out.points.size() < 2 || !(out.points.back().ratio < out.points.front().ratio)) out.decreasing = false;
    return out;
}

}  // namespace stickytail
