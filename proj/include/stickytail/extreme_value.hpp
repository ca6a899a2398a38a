#pragma once

#include <optional>
#include <span>
#include <vector>

#include "stickytail/classifier.hpp"

namespace stickytail {

/// G(x) = exp(-exp(-x)).
double gumbel_cdf(double x);

struct EvNorming {
    double a_n = 0.0;
    double b_n = 0.0;
    double n = 0.0;
};

/// Normalizing constants for maxima of n draws whose survival is ~ k t^p exp(-alpha t):
///   a_n = 1/alpha,  b_n = (log n + p log(log(n)/alpha) + log k) / alpha.
EvNorming ev_norming(double n, const TailAsymptotic& tail, double k);

struct Estimate {
    double value = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct JointTailModel {
    double alpha1 = 0.0, alpha2 = 0.0;
    double p1 = 0.0, p2 = 0.0;
    std::optional<Estimate> k_hat;
};

JointTailModel make_joint_tail_model(const TailAsymptotic& axis1, const TailAsymptotic& axis2,
                                     std::optional<Estimate> k_hat = std::nullopt);

/// k x^p1 y^p2 exp(-alpha1 x - alpha2 y).
double joint_tail_eval(double x, double y, const JointTailModel& m);

struct RatioPoint {
    double t = 0.0;
    double ratio = 0.0;
    double lower = 0.0;  // Wilson 95% interval
    double upper = 0.0;
    std::size_t conditioning = 0;
    std::size_t joint = 0;
};

struct IndependenceCurve {
    std::vector<RatioPoint> points;
    bool truncated = false;   // stopped at a t with too few exceedances
    bool decreasing = false;  // non-increasing within confidence intervals
};

inline constexpr std::size_t kMinIndependenceSamples = 100000;
inline constexpr std::size_t kMinExceedances = 50;

/// r(t) = #{both components > t} / #{first component > t}.
IndependenceCurve independence_diagnostic(std::span<const Vec2> samples, std::span<const double> t_grid);

/// Wilson score interval at z = 1.96.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials);

/// Kolmogorov-Smirnov distance between the empirical law of `values` and `cdf`.
template <class Cdf>
double ks_distance(std::vector<double> values, Cdf&& cdf);

}  // namespace stickytail

#include <algorithm>

template <class Cdf>
double stickytail::ks_distance(std::vector<double> values, Cdf&& cdf) {
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double f = cdf(values[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}
