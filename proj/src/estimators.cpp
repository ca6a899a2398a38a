#include "stickytail/estimators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "stickytail/error.hpp"

namespace stickytail {

OccupationEstimate occupation_measure(const SrbmPath& path, const ModelParams& params, const HistogramSpec& grid) {
    auto occ = make_occupation(grid);
    for (std::size_t i = 1; i < path.positions.size(); ++i) {
        const Vec2& z = path.positions[i];
        const double dl1 = path.local_times[i][0] - path.local_times[i - 1][0];
        const double dl2 = path.local_times[i][1] - path.local_times[i - 1][1];
        occ.add_interior(z, path.time[i] - path.time[i - 1]);
        if (dl1 > 0.0) occ.add_face(1, z, params.stick[0] * dl1);
        if (dl2 > 0.0) occ.add_face(2, z, params.stick[1] * dl2);
    }
    return occ;
}

namespace {

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double std_error(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / (v.size() - 1) / v.size());
}

}  // namespace

LocalTimeRatesEstimate estimate_local_time_rates(std::span<const ReplicationStats> reps) {
    if (reps.empty()) throw Error(ErrorCode::InvalidArgument, "no replications");
    ClockTotals tot;
    std::vector<double> t1, l1, l2;
    for (const auto& r : reps) {
        const auto& c = r.clocks;
        tot.srbm_time += c.srbm_time;
        tot.local_time[0] += c.local_time[0];
        tot.local_time[1] += c.local_time[1];
        tot.sticky += c.sticky;
        t1.push_back(c.srbm_time / c.sticky);
        l1.push_back(c.local_time[0] / c.sticky);
        l2.push_back(c.local_time[1] / c.sticky);
    }
    LocalTimeRatesEstimate e;
    e.rates = {tot.srbm_time / tot.sticky, tot.local_time[0] / tot.sticky, tot.local_time[1] / tot.sticky};
    e.std_error = {std_error(t1), std_error(l1), std_error(l2)};
    e.replications = static_cast<int>(reps.size());
    return e;
}

LocalTimeRatesEstimate estimate_local_time_rates(const SrbmPath& path) {
    if (path.sticky_clock.size() < 2) throw Error(ErrorCode::InvalidArgument, "path too short");
    const auto& l = path.local_times.back();
    const double s = path.time.back() + path.stick[0] * l[0] + path.stick[1] * l[1];
    LocalTimeRatesEstimate e;
    e.rates = {path.time.back() / s, path.local_times.back()[0] / s, path.local_times.back()[1] / s};
    e.replications = 1;
    return e;
}

namespace {

BarResidual bar_from_sums(const Vec2& theta, double interior, double face1, double face2, double sticky,
                          const ModelParams& params) {
    BarResidual b;
    b.theta = theta;
    b.psi = levy_exponent(params, theta);
    b.phi0 = interior / sticky;
    b.phi1 = face1 / sticky;
    b.phi2 = face2 / sticky;
    b.phi = b.phi0 + params.stick[0] * b.phi1 + params.stick[1] * b.phi2;
    const Vec2 r1{params.refl[0][0], params.refl[1][0]};
    const Vec2 r2{params.refl[0][1], params.refl[1][1]};
    const double c1 = dot(theta, r1);
    const double c2 = dot(theta, r2);
    {
        const double lhs = -b.psi * b.phi;
        const double rhs = (c1 - params.stick[0] * b.psi) * b.phi1 + (c2 - params.stick[1] * b.psi) * b.phi2;
        b.residual = std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs) + kResidualGuard);
    }
    {
        const double lhs = -b.psi * b.phi0;
        const double rhs = c1 * b.phi1 + c2 * b.phi2;
        b.residual_interior = std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs) + kResidualGuard);
    }
    return b;
}

}  // namespace

BarResidual bar_residual(const Vec2& theta, std::span<const ReplicationStats> reps, const ModelParams& params) {
    if (!(theta[0] < 0.0 && theta[1] < 0.0))
        throw Error(ErrorCode::InvalidArgument, "BAR check needs strictly negative theta");
    if (reps.empty()) throw Error(ErrorCode::InvalidArgument, "no replications");
    double in = 0.0, f1 = 0.0, f2 = 0.0, s = 0.0;
    for (const auto& r : reps) {
        const auto& th = r.mgf.thetas;
        const auto it = std::find(th.begin(), th.end(), theta);
        if (it == th.end()) throw Error(ErrorCode::InvalidArgument, "theta was not probed during simulation");
        const auto k = static_cast<std::size_t>(it - th.begin());
        in += r.mgf.interior[k];
        f1 += r.mgf.face1[k];
        f2 += r.mgf.face2[k];
        s += r.clocks.sticky;
    }
    return bar_from_sums(theta, in, f1, f2, s, params);
}

BarResidual bar_residual(const Vec2& theta, const SrbmPath& path, const ModelParams& params) {
    if (!(theta[0] < 0.0 && theta[1] < 0.0))
        throw Error(ErrorCode::InvalidArgument, "BAR check needs strictly negative theta");
    double in = 0.0, f1 = 0.0, f2 = 0.0;
    for (std::size_t i = 1; i < path.positions.size(); ++i) {
        const double e = std::exp(dot(theta, path.positions[i]));
        in += (path.time[i] - path.time[i - 1]) * e;
        f1 += (path.local_times[i][0] - path.local_times[i - 1][0]) * e;
        f2 += (path.local_times[i][1] - path.local_times[i - 1][1]) * e;
    }
    return bar_from_sums(theta, in, f1, f2, path.sticky_clock.back(), params);
}

namespace {

std::vector<double> tail_sums(const WeightedHistogram& h) {
    std::vector<double> s(h.weights.size() + 1);
    s.back() = h.overflow;
    for (std::size_t j = h.weights.size(); j-- > 0;) s[j] = s[j + 1] + h.weights[j];
    return s;
}

void fill_bands(SurvivalCurve& c) {
    const std::size_t m = c.batches.size();
    c.lower.resize(c.t.size());
    c.upper.resize(c.t.size());
    for (std::size_t j = 0; j < c.t.size(); ++j) {
        double se;
        if (m >= 2) {
            std::vector<double> v(m);
            for (std::size_t b = 0; b < m; ++b) v[b] = c.batches[b][j];
            se = std_error(v);
        } else {
            const double s = c.survival[j];
            se = std::sqrt(std::max(s * (1.0 - s), 0.0) / std::max(c.effective_samples, 1.0));
        }
        c.lower[j] = std::max(c.survival[j] - 1.96 * se, 0.0);
        c.upper[j] = std::min(c.survival[j] + 1.96 * se, 1.0);
    }
}

}  // namespace

SurvivalCurve survival_curve(std::span<const ReplicationStats> reps, std::size_t index, const std::string& name,
                             const Vec2& direction) {
    if (reps.empty()) throw Error(ErrorCode::InvalidArgument, "no replications");
    SurvivalCurve c;
    c.name = name;
    c.direction = direction;
    const auto& h0 = reps.front().survivals.at(index);
    const std::size_t n = h0.weights.size() + 1;
    c.t.resize(n);
    for (std::size_t j = 0; j < n; ++j) c.t[j] = static_cast<double>(j) * h0.bin_width;
    std::vector<double> pooled(n, 0.0);
    double total = 0.0;
    for (const auto& r : reps) {
        const auto& h = r.survivals.at(index);
        if (h.weights.size() + 1 != n || h.bin_width != h0.bin_width)
            throw Error(ErrorCode::InvalidArgument, "replication histograms differ");
        auto s = tail_sums(h);
        for (std::size_t j = 0; j < n; ++j) pooled[j] += s[j];
        total += h.total;
        for (auto& v : s) v /= h.total;
        c.batches.push_back(std::move(s));
        c.effective_samples += static_cast<double>(r.clocks.steps);
    }
    for (auto& v : pooled) v /= total;
    c.survival = std::move(pooled);
    fill_bands(c);
    return c;
}

SurvivalCurve survival_curve(std::span<const Vec2> samples, const Vec2& direction, double bin_width,
                             std::size_t bins, std::size_t batches, const std::string& name) {
    if (samples.empty()) throw Error(ErrorCode::InsufficientSamples, "no samples");
    if (!(bin_width > 0.0) || bins == 0) throw Error(ErrorCode::InvalidArgument, "bad survival grid");
    batches = std::clamp<std::size_t>(batches, 1, samples.size());
    SurvivalCurve c;
    c.name = name;
    c.direction = direction;
    c.effective_samples = static_cast<double>(samples.size());
    const std::size_t n = bins + 1;
    c.t.resize(n);
    for (std::size_t j = 0; j < n; ++j) c.t[j] = static_cast<double>(j) * bin_width;
    std::vector<double> pooled(n, 0.0);
    const std::size_t per = samples.size() / batches;
    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t lo = b * per;
        const std::size_t hi = b + 1 == batches ? samples.size() : lo + per;
        WeightedHistogram h;
        h.bin_width = bin_width;
        h.weights.assign(bins, 0.0);
        for (std::size_t i = lo; i < hi; ++i) {
            const double x = dot(direction, samples[i]) / bin_width;
            if (x >= static_cast<double>(bins))
                h.overflow += 1.0;
            else
                h.weights[static_cast<std::size_t>(std::max(x, 0.0))] += 1.0;
        }
        h.total = static_cast<double>(hi - lo);
        auto s = tail_sums(h);
        for (std::size_t j = 0; j < n; ++j) pooled[j] += s[j];
        for (auto& v : s) v /= h.total;
        c.batches.push_back(std::move(s));
    }
    for (auto& v : pooled) v /= static_cast<double>(samples.size());
    c.survival = std::move(pooled);
    fill_bands(c);
    return c;
}

FitWindow quantile_window(const SurvivalCurve& c, double q_lo, double q_hi) {
    auto quantile = [&](double q) {
        for (std::size_t j = 0; j < c.t.size(); ++j)
            if (c.survival[j] <= 1.0 - q) return c.t[j];
        throw Error(ErrorCode::InsufficientTailData,
                    "quantile " + std::to_string(q) + " of '" + c.name + "' lies beyond the histogram range");
    };
    return {quantile(q_lo), quantile(q_hi)};
}

namespace {

// Weighted least squares with up to three regressors via the normal equations.
template <std::size_t K>
std::array<double, K> wls(const std::vector<std::array<double, K>>& x, const std::vector<double>& y,
                          const std::vector<double>& w) {
    std::array<std::array<double, K + 1>, K> a{};
    for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t r = 0; r < K; ++r) {
            for (std::size_t s = 0; s < K; ++s) a[r][s] += w[i] * x[i][r] * x[i][s];
            a[r][K] += w[i] * x[i][r] * y[i];
        }
    for (std::size_t col = 0; col < K; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < K; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        if (a[col][col] == 0.0) throw Error(ErrorCode::InsufficientTailData, "singular tail regression");
        for (std::size_t r = 0; r < K; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (std::size_t s = col; s <= K; ++s) a[r][s] -= f * a[col][s];
        }
    }
    std::array<double, K> beta{};
    for (std::size_t r = 0; r < K; ++r) beta[r] = a[r][K] / a[r][r];
    return beta;
}

struct FitPoints {
    std::vector<double> t, log_s, w;
};

FitPoints window_points(const std::vector<double>& t, const std::vector<double>& s, const FitWindow& win) {
    FitPoints p;
    for (std::size_t j = 0; j < t.size(); ++j) {
        if (t[j] < win.lo || t[j] > win.hi || t[j] <= 0.0) continue;
        if (!(s[j] > 0.0)) return {};  // window runs past the observed tail
        p.t.push_back(t[j]);
        p.log_s.push_back(std::log(s[j]));
        p.w.push_back(s[j]);
    }
    return p;
}

// log S + p log t = log k - alpha t
std::array<double, 2> fixed_p_fit(const FitPoints& p, double p_fixed) {
    std::vector<std::array<double, 2>> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < p.t.size(); ++i) {
        x.push_back({1.0, -p.t[i]});
        y.push_back(p.log_s[i] - p_fixed * std::log(p.t[i]));
    }
    return wls<2>(x, y, p.w);
}

void require_effective(const SurvivalCurve& c) {
    if (c.effective_samples < kMinEffectiveSamples)
        throw Error(ErrorCode::InsufficientTailData,
                    "'" + c.name + "' has " + std::to_string(static_cast<long long>(c.effective_samples)) +
                        " effective samples, need " + std::to_string(static_cast<long long>(kMinEffectiveSamples)));
}

}  // namespace

double TailFit::fitted_survival(double t) const {
    if (t <= 0.0) return std::exp(log_k);
    return std::exp(log_k - alpha_hat * t + p_fixed * std::log(t));
}

TailFit survival_and_fit(const SurvivalCurve& c, double p_fixed, std::optional<FitWindow> window) {
    require_effective(c);
    TailFit f;
    f.p_fixed = p_fixed;
    f.window = window ? *window : quantile_window(c);
    const auto pts = window_points(c.t, c.survival, f.window);
    if (pts.t.size() < kMinFitPoints)
        throw Error(ErrorCode::InsufficientTailData, "fit window of '" + c.name + "' truncated");
    f.points = pts.t.size();
    const auto beta = fixed_p_fit(pts, p_fixed);
    f.log_k = beta[0];
    f.alpha_hat = beta[1];

    std::vector<std::array<double, 3>> x;
    for (double t : pts.t) x.push_back({1.0, -t, std::log(t)});
    try {
        const auto free = wls<3>(x, pts.log_s, pts.w);
        f.alpha_free = free[1];
        f.p_free = free[2];
    } catch (const Error&) {
        f.alpha_free = std::nan("");
        f.p_free = std::nan("");
    }

    std::vector<double> alphas;
    for (const auto& b : c.batches) {
        const auto bp = window_points(c.t, b, f.window);
        if (bp.t.size() < kMinFitPoints) continue;
        alphas.push_back(fixed_p_fit(bp, p_fixed)[1]);
    }
    if (alphas.size() >= 2) {
        f.alpha_se = std_error(alphas);
    } else {
        // residual-based standard error of the slope
        double sw = 0, st = 0, stt = 0, rss = 0;
        for (std::size_t i = 0; i < pts.t.size(); ++i) {
            sw += pts.w[i];
            st += pts.w[i] * pts.t[i];
            stt += pts.w[i] * pts.t[i] * pts.t[i];
            const double r = pts.log_s[i] - p_fixed * std::log(pts.t[i]) - (f.log_k - f.alpha_hat * pts.t[i]);
            rss += pts.w[i] * r * r;
        }
        const double sxx = stt - st * st / sw;
        f.alpha_se = std::sqrt(rss / (pts.t.size() - 2) / sxx);
    }
    return f;
}

Estimate fit_tail_coefficient(const SurvivalCurve& c, double alpha, double p, std::optional<FitWindow> window) {
    if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
    const FitWindow win = window ? *window : quantile_window(c);
    auto log_k = [&](const std::vector<double>& s) {
        const auto pts = window_points(c.t, s, win);
        if (pts.t.size() < kMinFitPoints) return std::nan("");
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < pts.t.size(); ++i) {
            num += pts.w[i] * (pts.log_s[i] + alpha * pts.t[i] - p * std::log(pts.t[i]));
            den += pts.w[i];
        }
        return num / den;
    };
    const double lk = log_k(c.survival);
    if (std::isnan(lk)) throw Error(ErrorCode::InsufficientTailData, "fit window of '" + c.name + "' truncated");
    std::vector<double> per;
    for (const auto& b : c.batches) {
        const double v = log_k(b);
        if (!std::isnan(v)) per.push_back(v);
    }
    const double se = std_error(per);
    return {std::exp(lk), std::exp(lk - 1.96 * se), std::exp(lk + 1.96 * se)};
}

double joint_survival(std::span<const Vec2> samples, double x, double y) {
    if (samples.empty()) throw Error(ErrorCode::InsufficientSamples, "no samples");
    std::size_t hits = 0;
    for (const auto& s : samples) hits += (s[0] > x && s[1] > y) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(samples.size());
}

}  // namespace stickytail
