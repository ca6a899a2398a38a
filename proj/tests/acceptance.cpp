// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "stickytail/classifier.hpp"
#include "stickytail/kernel.hpp"
#include "stickytail/report.hpp"
#include "support.hpp"

using namespace stickytail;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

int failures = 0;

void report(int n, const std::string& title, const Outcome& o) {
    std::printf("criterion %d %-32s %s  %s\n", n, title.c_str(), o.passed ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (!o.passed) ++failures;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

RunConfig model_config(const ModelParams& p) {
    RunConfig cfg;
    cfg.model = p;
    cfg.theta_grid = default_theta_grid();
    return cfg;
}

const Json* find_verdict(const Json& rep, const std::string& name) {
    for (const auto& v : rep["verdicts"])
        if (v["name"] == name) return &v;
    return nullptr;
}

// 1: simulated rates within 5% of the exact ones.
Outcome rates(const Json& rep, const std::string& label, const LocalTimeRates& truth) {
    const auto& s = rep["simulated"]["main"]["local_time_rates"];
    const double e[3] = {s["e_T1"], s["e_L1"], s["e_L2"]};
    const double t[3] = {truth.e_T1, truth.e_L1, truth.e_L2};
    bool ok = true;
    std::string d = label + " (";
    for (int i = 0; i < 3; ++i) {
        ok = ok && std::abs(e[i] / t[i] - 1) <= 0.05;
        d += num(e[i]) + (i < 2 ? ", " : ") vs (");
    }
    for (int i = 0; i < 3; ++i) d += num(t[i]) + (i < 2 ? ", " : ")");
    return {ok, d};
}

// 2: every BAR residual on the grid below 0.03.
Outcome bar(const Json& rep, const std::string& label) {
    double worst = 0;
    for (const auto& r : rep["residuals"]["bar"]) worst = std::max(worst, r["residual"].get<double>());
    const bool ok = rep["residuals"]["bar"].size() == 25 && worst < 0.03;
    return {ok, label + " worst " + num(worst) + " over " + std::to_string(rep["residuals"]["bar"].size()) +
                    " thetas"};
}

// 5: fitted rate in range with enough samples.
Outcome alpha_in(const Json& rep, const std::string& label, const std::string& name, double lo, double hi) {
    const auto& t = rep["simulated"]["main"]["tails"][name];
    if (!t.contains("alpha_hat")) return {false, label + " " + name + ": " + t.dump()};
    const double a = t["alpha_hat"], n = t["effective_samples"];
    const bool ok = a >= lo && a <= hi && n >= 1e6;
    return {ok, label + " " + name + " alpha " + num(a) + " in [" + num(lo) + ", " + num(hi) + "], samples " +
                    num(n)};
}

Outcome both(const Outcome& a, const Outcome& b) { return {a.passed && b.passed, a.detail + "; " + b.detail}; }

// Discriminant D1 written out from the parameters, independent of the kernel module.
double disc_x(double x, const ModelParams& p) {
    const double a = 0.5 * p.sigma[1][1], b = p.mu[1] + p.sigma[0][1] * x;
    const double c = p.mu[0] * x + 0.5 * p.sigma[0][0] * x * x;
    return b * b - 4 * a * c;
}

double scan_largest_zero(const std::function<double(double)>& f, double lo, double hi, int n) {
    const double h = (hi - lo) / n;
    double found = std::nan(""), prev = f(lo), prev_x = lo;
    for (int i = 1; i <= n; ++i) {
        const double x = lo + i * h, v = f(x);
        if ((prev < 0) != (v < 0)) {
            double a = prev_x, b = x;
            for (int k = 0; k < 100; ++k) {
                const double m = 0.5 * (a + b);
                ((f(a) < 0) != (f(m) < 0) ? b : a) = m;
            }
            found = 0.5 * (a + b);
        }
        prev = v;
        prev_x = x;
    }
    return found;
}

Outcome kernel_checks() {
    std::mt19937_64 rng(31);
    std::vector<ModelParams> models{testing_support::m0(), testing_support::m1()};
    for (int i = 0; i < 8; ++i) models.push_back(testing_support::random_model(rng));

    // timed part: the library computations the criterion is about
    const auto start = std::chrono::steady_clock::now();
    double worst_res = 0;
    std::vector<BranchPoints> bps;
    for (const auto& p : models) {
        const auto b = branch_points(p);
        bps.push_back(b);
        const int n = 10000;
        for (int i = 0; i <= n; ++i) {
            const double x = b.x1 + (b.x2 - b.x1) * i / n;
            for (auto br : {Branch::Lower, Branch::Upper})
                worst_res = std::max(worst_res, std::abs(kernel_eval(x, y_branch(x, br, p), p)) / (1 + x * x));
        }
        singularity_candidates(p);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    double worst_gap = 0;
    for (std::size_t m = 0; m < models.size(); ++m) {
        const auto& p = models[m];
        const double x2 = bps[m].x2;
        const double ox = scan_largest_zero([&](double x) { return disc_x(x, p); }, -10 * x2, 10 * x2, 200000);
        worst_gap = std::max(worst_gap, std::abs(ox - x2));
    }
    const bool ok = worst_res < 1e-10 && worst_gap < 1e-6 && secs < 1.0;
    return {ok, "residual " + num(worst_res) + ", oracle gap " + num(worst_gap) + ", " + num(secs) + " s on " +
                    std::to_string(models.size()) + " models"};
}

Outcome product_form() {
    std::mt19937_64 rng(20);
    double worst = 0;
    bool ok = true;
    for (int i = 0; i < 20; ++i) {
        const auto p = testing_support::product_form_model(rng);
        for (int axis = 1; axis <= 2; ++axis) {
            const auto r = classify_marginal(axis, p);
            const double truth = -2 * p.mu[axis - 1] / p.sigma[axis - 1][axis - 1];
            worst = std::max(worst, std::abs(r.alpha / truth - 1));
            ok = ok && r.p == 0.0;
        }
    }
    ok = ok && worst < 1e-12;
    return {ok, "20 models, worst relative alpha error " + num(worst)};
}

// Regime signature of a model: every classifier output, or the error raised.
std::string signature(const ModelParams& p) {
    std::string s;
    auto add = [&](auto&& f) {
        try {
            const TailAsymptotic t = f();
            s += t.regime + "/" + num(t.p) + ";";
        } catch (const Error& e) {
            s += std::string(to_string(e.code())) + ";";
        }
    };
    add([&] { return classify_boundary(1, p); });
    add([&] { return classify_boundary(2, p); });
    add([&] { return classify_marginal(1, p); });
    add([&] { return classify_marginal(2, p); });
    add([&] { return classify_direction(DirectionalQuery({1, 1}), p); });
    return s;
}

bool well_separated(const ModelParams& p) {
    for (const auto& q : {p, swap_coordinates(p)}) {
        const auto c = singularity_candidates(q);
        const double v[3] = {c.x_star, c.x_tilde, c.x2};
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                if (std::isfinite(v[i]) && std::isfinite(v[j]) && std::abs(v[i] - v[j]) <= 1e-6) return false;
    }
    return true;
}

Outcome tie_fuzz() {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> sign(0, 1);
    auto jiggle = [&](double v) { return v * (1 + (sign(rng) ? 1e-12 : -1e-12)); };
    int tested = 0, changed = 0, skipped = 0;
    while (tested < 100) {
        const auto p = testing_support::random_model(rng);
        if (!well_separated(p)) {
            ++skipped;
            continue;
        }
        ModelParams q = p;
        for (auto& m : q.mu) m = jiggle(m);
        for (auto& s : q.stick) s = jiggle(s);
        q.sigma[0][0] = jiggle(q.sigma[0][0]);
        q.sigma[1][1] = jiggle(q.sigma[1][1]);
        q.sigma[0][1] = q.sigma[1][0] = jiggle(q.sigma[0][1]);
        for (auto& row : q.refl)
            for (auto& r : row) r = jiggle(r);
        ++tested;
        if (signature(p) != signature(q)) ++changed;
    }
    return {changed == 0, std::to_string(tested) + " models, " + std::to_string(changed) + " regime changes, " +
                              std::to_string(skipped) + " near-tie models skipped"};
}

Outcome determinism() {
    auto cfg = model_config(testing_support::m0());
    cfg.sim.dt = 1e-2;
    cfg.sim.horizon = 2000;
    cfg.sim.burn_in = 10;
    cfg.sim.replications = 2;
    cfg.sim.seed = 99;
    cfg.ev.blocks = 20;
    cfg.ev.block_size = 200;
    const auto a = run_verify(cfg), b = run_verify(cfg);
    // compare serialized bytes: failed verdicts carry NaN values, which never compare equal
    bool same = a.to_json().dump(2) == b.to_json().dump(2) && a.verdicts.size() == b.verdicts.size();
    for (std::size_t i = 0; same && i < a.verdicts.size(); ++i)
        same = a.verdicts[i].name == b.verdicts[i].name && a.verdicts[i].passed == b.verdicts[i].passed;
    return {same, std::string("reduced verify twice: reports ") + (same ? "byte-identical" : "differ")};
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

    const auto p0 = testing_support::m0(), p1 = testing_support::m1();
    auto c0 = model_config(p0);
    auto c1 = model_config(p1);
    c1.ev.enabled = false;
    std::printf("running M0 (with extremes) and M1 ...\n");
    std::fflush(stdout);
    const auto r0 = run_verify(c0).to_json();
    const auto r1 = run_verify(c1).to_json();
    std::printf("simulations done in %.0f s\n", elapsed());

    report(1, "local-time rates", both(rates(r0, "M0", local_time_rates(p0).rates),
                                       rates(r1, "M1", local_time_rates(p1).rates)));
    report(2, "BAR residual", both(bar(r0, "M0"), bar(r1, "M1")));
    report(3, "kernel correctness", kernel_checks());
    report(4, "product-form classifier", product_form());
    report(5, "tail decay", both(alpha_in(r0, "M0", "axis1", 1.8, 2.2),
                                 both(alpha_in(r1, "M1", "axis2", 3.6, 4.4),
                                      alpha_in(r1, "M1", "direction_1_1", 1.8, 2.2))));

    {
        const auto* ind = find_verdict(r0, "independence");
        const auto* joint = find_verdict(r0, "joint_survival");
        const auto& ex = r0["simulated"]["extremes"];
        Outcome o;
        if (!ind || !joint) {
            o = {false, "verdicts missing"};
        } else {
            const auto& pts = ex["independence"]["points"];
            const double r3 = pts.empty() ? std::nan("") : pts.back()["ratio"].get<double>();
            const double ratio = (*joint)["value"];
            o.passed = ex["independence"]["decreasing"].get<bool>() && pts.size() == 5 && r3 < 0.1 &&
                       ratio >= 0.5 && ratio <= 2.0;
            o.detail = "r(3) " + num(r3) + ", decreasing " + ex["independence"]["decreasing"].dump() +
                       ", joint(2,2) empirical/predicted " + num(ratio);
        }
        report(6, "asymptotic independence", o);
    }
    {
        const auto& g = r0["simulated"]["extremes"]["gumbel"];
        Outcome o;
        if (!g.contains("ks_distance")) {
            o = {false, g.dump()};
        } else {
            const double ks = g["ks_distance"];
            o = {ks < 0.05 && g["blocks"] == 500 && g["block_size"] == 10000,
                 "KS " + num(ks) + " over " + g["blocks"].dump() + " blocks of " + g["block_size"].dump()};
        }
        report(7, "Gumbel convergence", o);
    }
    report(8, "determinism and tie robustness", both(determinism(), tie_fuzz()));

    std::printf("%d criteria failed, %.0f s total\n", failures, elapsed());
    return failures == 0 ? 0 : 1;
}
