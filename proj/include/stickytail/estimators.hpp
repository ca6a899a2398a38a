#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stickytail/extreme_value.hpp"
#include "stickytail/model.hpp"
#include "stickytail/simulator.hpp"

namespace stickytail {

/// Occupation measure of a recorded path: weight dt per grid step plus
/// u_i dL_i at face increments, normalized by the sticky clock.
OccupationEstimate occupation_measure(const SrbmPath& path, const ModelParams& params, const HistogramSpec& grid);

struct LocalTimeRatesEstimate {
    LocalTimeRates rates;
    LocalTimeRates std_error;  // across replications; zero with a single replication
    int replications = 0;
};

/// Long-run rate estimator: totals divided by total sticky time.
LocalTimeRatesEstimate estimate_local_time_rates(std::span<const ReplicationStats> reps);
LocalTimeRatesEstimate estimate_local_time_rates(const SrbmPath& path);

struct BarResidual {
    Vec2 theta{};
    double psi = 0.0;
    double phi = 0.0;   // stationary MGF of the sticky process
    double phi0 = 0.0;  // SRBM-time part
    double phi1 = 0.0;  // face-1 local-time part
    double phi2 = 0.0;
    double residual = 0.0;           // full relation with sticky weights
    double residual_interior = 0.0;  // relation over the SRBM-time part
};

inline constexpr double kResidualGuard = 1e-12;

/// theta must be one of the probe thetas the replications were run with.
BarResidual bar_residual(const Vec2& theta, std::span<const ReplicationStats> reps, const ModelParams& params);
BarResidual bar_residual(const Vec2& theta, const SrbmPath& path, const ModelParams& params);

struct SurvivalCurve {
    std::string name;
    Vec2 direction{};
    std::vector<double> t;
    std::vector<double> survival;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::vector<double>> batches;  // per-replication (or per-batch) survival on the same t
    double effective_samples = 0.0;
};

/// Survival of <direction, Z> from the replications' weighted histograms.
SurvivalCurve survival_curve(std::span<const ReplicationStats> reps, std::size_t index, const std::string& name,
                             const Vec2& direction);
/// Survival of <direction, Z> from stationary samples, split into `batches` contiguous batches.
SurvivalCurve survival_curve(std::span<const Vec2> samples, const Vec2& direction, double bin_width,
                             std::size_t bins, std::size_t batches = 8, const std::string& name = "samples");

struct FitWindow {
    double lo = 0.0;
    double hi = 0.0;
};

/// [q_lo, q_hi] of the empirical law described by the curve.
FitWindow quantile_window(const SurvivalCurve& c, double q_lo = 0.90, double q_hi = 0.999);

inline constexpr double kMinEffectiveSamples = 1e6;
inline constexpr std::size_t kMinFitPoints = 8;

struct TailFit {
    FitWindow window;
    double p_fixed = 0.0;
    double alpha_hat = 0.0;
    double alpha_se = 0.0;
    double log_k = 0.0;
    double alpha_free = 0.0;  // log S = c - alpha t + p log t with p free
    double p_free = 0.0;
    std::size_t points = 0;

    double fitted_survival(double t) const;
};

TailFit survival_and_fit(const SurvivalCurve& c, double p_fixed, std::optional<FitWindow> window = std::nullopt);

/// Coefficient k in S(t) ~ k t^p e^{-alpha t} with alpha and p held fixed.
Estimate fit_tail_coefficient(const SurvivalCurve& c, double alpha, double p,
                              std::optional<FitWindow> window = std::nullopt);

double joint_survival(std::span<const Vec2> samples, double x, double y);

}  // namespace stickytail
