#include "stickytail/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace stickytail {

namespace {

// ---------------------------------------------------------------------------
// config parsing

[[noreturn]] void parse_fail(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::ParseError, where + ": " + what);
}

void check_keys(const Json& obj, const std::string& ptr, const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            parse_fail(ptr + "/" + key, "unknown key \"" + key + "\" (expected one of: " + list + ")");
        }
    }
}

double number(const Json& j, const std::string& ptr) {
    if (!j.is_number()) parse_fail(ptr, "expected a number");
    return j.get<double>();
}

Vec2 vec2(const Json& j, const std::string& ptr) {
    if (!j.is_array() || j.size() != 2) parse_fail(ptr, "expected an array of two numbers");
    return {number(j[0], ptr + "/0"), number(j[1], ptr + "/1")};
}

Mat2 mat2(const Json& j, const std::string& ptr) {
    if (!j.is_array() || j.size() != 2) parse_fail(ptr, "expected a 2x2 array");
    const Vec2 r0 = vec2(j[0], ptr + "/0"), r1 = vec2(j[1], ptr + "/1");
    return {{{r0[0], r0[1]}, {r1[0], r1[1]}}};
}

std::vector<Vec2> vec2_list(const Json& j, const std::string& ptr) {
    if (!j.is_array()) parse_fail(ptr, "expected an array of pairs");
    std::vector<Vec2> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(vec2(j[i], ptr + "/" + std::to_string(i)));
    return out;
}

int positive_int(const Json& j, const std::string& ptr) {
    if (!j.is_number_integer() || j.get<long long>() < 1) parse_fail(ptr, "expected a positive integer");
    return j.get<int>();
}

std::string location(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

Json ext(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

std::string fmt(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

}  // namespace

std::vector<Vec2> default_theta_grid() {
    std::vector<Vec2> g;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) g.push_back({-2.0 + 0.475 * i, -2.0 + 0.475 * j});
    return g;
}

RunConfig parse_config_text(const std::string& text, const std::string& source) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::string msg = e.what();
        const auto cut = msg.find("parse error");
        parse_fail(source, location(text, e.byte) + ": " + (cut == std::string::npos ? msg : msg.substr(cut)));
    }
    if (!j.is_object()) parse_fail(source, "top level must be an object");
    check_keys(j, "", {"mu", "sigma", "R", "u", "sim", "directions", "theta_grid", "ev", "output", "tolerances"});
    for (const char* key : {"mu", "sigma", "R", "u"})
        if (!j.contains(key)) parse_fail(source, std::string("missing required key \"") + key + "\"");

    RunConfig cfg;
    cfg.model.mu = vec2(j["mu"], "/mu");
    cfg.model.sigma = mat2(j["sigma"], "/sigma");
    cfg.model.refl = mat2(j["R"], "/R");
    cfg.model.stick = vec2(j["u"], "/u");

    if (j.contains("sim")) {
        const auto& s = j["sim"];
        if (!s.is_object()) parse_fail("/sim", "expected an object");
        check_keys(s, "/sim", {"dt", "horizon", "burn_in", "replications", "seed"});
        if (s.contains("dt")) cfg.sim.dt = number(s["dt"], "/sim/dt");
        if (s.contains("horizon")) cfg.sim.horizon = number(s["horizon"], "/sim/horizon");
        // burn-in defaults to 1% of the horizon so short runs stay valid
        cfg.sim.burn_in = s.contains("burn_in") ? number(s["burn_in"], "/sim/burn_in") : cfg.sim.horizon / 100.0;
        if (s.contains("replications")) cfg.sim.replications = positive_int(s["replications"], "/sim/replications");
        if (s.contains("seed")) {
            if (!s["seed"].is_number_unsigned()) parse_fail("/sim/seed", "expected a nonnegative integer");
            cfg.sim.seed = s["seed"].get<std::uint64_t>();
        }
    }
    if (j.contains("directions")) cfg.directions = vec2_list(j["directions"], "/directions");
    cfg.theta_grid = j.contains("theta_grid") ? vec2_list(j["theta_grid"], "/theta_grid") : default_theta_grid();

    if (j.contains("ev")) {
        const auto& e = j["ev"];
        if (!e.is_object()) parse_fail("/ev", "expected an object");
        check_keys(e, "/ev",
                   {"enabled", "blocks", "block_size", "dt", "sample_spacing", "independence_grid", "joint_point"});
        if (e.contains("enabled")) {
            if (!e["enabled"].is_boolean()) parse_fail("/ev/enabled", "expected true or false");
            cfg.ev.enabled = e["enabled"].get<bool>();
        }
        if (e.contains("blocks")) cfg.ev.blocks = positive_int(e["blocks"], "/ev/blocks");
        if (e.contains("block_size")) cfg.ev.block_size = positive_int(e["block_size"], "/ev/block_size");
        if (e.contains("dt")) cfg.ev.dt = number(e["dt"], "/ev/dt");
        if (e.contains("sample_spacing")) cfg.ev.sample_spacing = number(e["sample_spacing"], "/ev/sample_spacing");
        if (e.contains("independence_grid")) {
            const auto& g = e["independence_grid"];
            if (!g.is_array()) parse_fail("/ev/independence_grid", "expected an array of numbers");
            cfg.ev.independence_grid.clear();
            for (std::size_t i = 0; i < g.size(); ++i)
                cfg.ev.independence_grid.push_back(number(g[i], "/ev/independence_grid/" + std::to_string(i)));
        }
        if (e.contains("joint_point")) cfg.ev.joint_point = vec2(e["joint_point"], "/ev/joint_point");
    }
    if (j.contains("output")) {
        const auto& o = j["output"];
        if (!o.is_object()) parse_fail("/output", "expected an object");
        check_keys(o, "/output", {"format", "directory"});
        if (o.contains("format")) {
            if (!o["format"].is_string()) parse_fail("/output/format", "expected \"json\" or \"csv\"");
            cfg.output.format = o["format"].get<std::string>();
        }
        if (o.contains("directory")) {
            if (!o["directory"].is_string()) parse_fail("/output/directory", "expected a string");
            cfg.output.directory = o["directory"].get<std::string>();
        }
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        if (!t.is_object()) parse_fail("/tolerances", "expected an object");
        check_keys(t, "/tolerances",
                   {"local_time_rel", "bar_residual", "tail_alpha_rel", "independence_ratio", "joint_factor",
                    "gumbel_ks"});
        auto set = [&](const char* k, double& v) {
            if (t.contains(k)) v = number(t[k], std::string("/tolerances/") + k);
        };
        set("local_time_rel", cfg.tolerances.local_time_rel);
        set("bar_residual", cfg.tolerances.bar_residual);
        set("tail_alpha_rel", cfg.tolerances.tail_alpha_rel);
        set("independence_ratio", cfg.tolerances.independence_ratio);
        set("joint_factor", cfg.tolerances.joint_factor);
        set("gumbel_ks", cfg.tolerances.gumbel_ks);
    }

    // semantic checks
    validate(cfg.model);
    check_sim_config(cfg.sim);
    for (const auto& d : cfg.directions) {
        if (!(d[0] >= 0 && d[1] >= 0 && (d[0] > 0 || d[1] > 0)))
            throw Error(ErrorCode::ValidationError,
                        "direction (" + fmt(d[0]) + ", " + fmt(d[1]) + ") must be nonnegative and nonzero");
    }
    for (const auto& th : cfg.theta_grid)
        if (!(th[0] < 0 && th[1] < 0))
            throw Error(ErrorCode::ValidationError,
                        "theta (" + fmt(th[0]) + ", " + fmt(th[1]) + ") must be strictly negative");
    if (cfg.output.format != "json" && cfg.output.format != "csv")
        throw Error(ErrorCode::ValidationError, "output.format must be \"json\" or \"csv\"");
    if (cfg.ev.enabled) {
        if (!(cfg.ev.dt > 0) || !(cfg.ev.sample_spacing > 0))
            throw Error(ErrorCode::ValidationError, "ev.dt and ev.sample_spacing must be positive");
        if (cfg.ev.block_size < 3) throw Error(ErrorCode::ValidationError, "ev.block_size must be at least 3");
        if (!std::is_sorted(cfg.ev.independence_grid.begin(), cfg.ev.independence_grid.end()))
            throw Error(ErrorCode::ValidationError, "ev.independence_grid must be increasing");
    }
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::IoError, "cannot read config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), path);
}

Json config_to_json(const RunConfig& c) {
    auto v2 = [](const Vec2& v) { return Json::array({v[0], v[1]}); };
    auto m2 = [&](const Mat2& m) { return Json::array({v2({m[0][0], m[0][1]}), v2({m[1][0], m[1][1]})}); };
    Json j;
    j["mu"] = v2(c.model.mu);
    j["sigma"] = m2(c.model.sigma);
    j["R"] = m2(c.model.refl);
    j["u"] = v2(c.model.stick);
    j["sim"] = {{"dt", c.sim.dt},
                {"horizon", c.sim.horizon},
                {"burn_in", c.sim.burn_in},
                {"replications", c.sim.replications},
                {"seed", c.sim.seed}};
    j["directions"] = Json::array();
    for (const auto& d : c.directions) j["directions"].push_back(v2(d));
    j["theta_grid"] = Json::array();
    for (const auto& t : c.theta_grid) j["theta_grid"].push_back(v2(t));
    j["ev"] = {{"enabled", c.ev.enabled},
               {"blocks", c.ev.blocks},
               {"block_size", c.ev.block_size},
               {"dt", c.ev.dt},
               {"sample_spacing", c.ev.sample_spacing},
               {"independence_grid", c.ev.independence_grid},
               {"joint_point", v2(c.ev.joint_point)}};
    j["output"] = {{"format", c.output.format}, {"directory", c.output.directory}};
    j["tolerances"] = {{"local_time_rel", c.tolerances.local_time_rel},
                       {"bar_residual", c.tolerances.bar_residual},
                       {"tail_alpha_rel", c.tolerances.tail_alpha_rel},
                       {"independence_ratio", c.tolerances.independence_ratio},
                       {"joint_factor", c.tolerances.joint_factor},
                       {"gumbel_ks", c.tolerances.gumbel_ks}};
    return j;
}

// ---------------------------------------------------------------------------
// analytic half

namespace {

Json error_json(const Error& e) { return {{"error", std::string(to_string(e.code()))}, {"message", e.what()}}; }

Json tail_json(const TailAsymptotic& t) {
    return {{"alpha", t.alpha},
            {"p", t.p},
            {"regime", t.regime},
            {"dominant", std::string(to_string(t.dominant))},
            {"experimental", t.experimental}};
}

std::string direction_name(const Vec2& d) { return "direction_" + fmt(d[0]) + "_" + fmt(d[1]); }

// A named functional <direction, Z> with its analytic tail, when classification succeeds.
struct Functional {
    std::string name;
    Vec2 direction;
    std::optional<TailAsymptotic> tail;
    std::optional<Error> error;
};

std::vector<Functional> functionals(const RunConfig& cfg) {
    std::vector<Functional> out;
    auto add = [&](std::string name, Vec2 dir, auto&& classify) {
        Functional f{std::move(name), dir, std::nullopt, std::nullopt};
        try {
            f.tail = classify();
        } catch (const Error& e) {
            f.error = e;
        }
        out.push_back(std::move(f));
    };
    add("axis1", {1, 0}, [&] { return classify_marginal(1, cfg.model); });
    add("axis2", {0, 1}, [&] { return classify_marginal(2, cfg.model); });
    // the survival probe uses the normalized direction the classifier works with
    for (const auto& d : cfg.directions)
        add(direction_name(d), DirectionalQuery(d).u_bar(), [&] { return classify_direction(DirectionalQuery(d), cfg.model); });
    return out;
}

Json analytic_json(const RunConfig& cfg, const std::vector<Functional>& fs) {
    const auto& p = cfg.model;
    Json a;
    const auto lt = local_time_rates(p);
    a["local_time_rates"] = {{"e_T1", lt.rates.e_T1},
                             {"e_L1", lt.rates.e_L1},
                             {"e_L2", lt.rates.e_L2},
                             {"closed_form_L1", lt.closed_form_L1},
                             {"closed_form_L2", lt.closed_form_L2},
                             {"rel_discrepancy_L1", lt.rel_discrepancy_L1},
                             {"rel_discrepancy_L2", lt.rel_discrepancy_L2}};
    Json k;
    try {
        const auto b = branch_points(p);
        k["branch_points"] = {{"x1", b.x1}, {"x2", b.x2}, {"y1", b.y1}, {"y2", b.y2}};
        const double xs = find_x_star(p);
        const auto yt = find_y_star_x_tilde(p);
        k["candidates"] = {{"x_star", ext(xs)},
                           {"y_star", ext(yt.y_star)},
                           {"x_tilde", ext(yt.x_tilde)},
                           {"x_tilde_candidate", ext(yt.x_tilde_candidate)}};
        const auto cc = kernel_cross_checks(p);
        k["cross_checks"] = {{"x2_closed_form", cc.x2_closed_form},
                             {"x_star_closed_form", cc.x_star_closed_form},
                             {"y_star_closed_form", cc.y_star_closed_form},
                             {"x_star_ray", cc.x_star_ray},
                             {"y_star_ray", cc.y_star_ray}};
    } catch (const Error& e) {
        k = error_json(e);
    }
    a["kernel"] = k;

    Json tails;
    for (int face = 1; face <= 2; ++face) {
        try {
            tails["boundary" + std::to_string(face)] = tail_json(classify_boundary(face, p));
        } catch (const Error& e) {
            tails["boundary" + std::to_string(face)] = error_json(e);
        }
    }
    for (const auto& f : fs) {
        Json t = f.tail ? tail_json(*f.tail) : error_json(*f.error);
        t["direction"] = {f.direction[0], f.direction[1]};
        tails[f.name] = t;
    }
    a["tails"] = tails;

    try {
        const auto [t1, t2] = joint_tail_params(p);
        a["joint_tail"] = {{"axis1", tail_json(t1)}, {"axis2", tail_json(t2)}};
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ReflectionNotSubstochastic) throw;
        a["joint_tail"] = {{"notice", "ReflectionNotSubstochastic"}, {"message", e.what()}};
    }

    Json ev;
    for (const auto& f : fs) {
        if (f.name != "axis1" && f.name != "axis2") continue;
        if (!f.tail) continue;
        const auto n = ev_norming(cfg.ev.block_size, *f.tail, 1.0);
        ev[f.name] = {{"n", n.n}, {"a_n", n.a_n}, {"b_n", n.b_n}, {"k", 1.0}, {"k_source", "unit"}};
    }
    a["ev_norming"] = ev;
    return a;
}

Json verdict_json(const Verdict& v) {
    return {{"name", v.name},
            {"passed", v.passed},
            {"value", v.value},
            {"tolerance", v.tolerance},
            {"threshold", v.threshold},
            {"detail", v.detail}};
}

// ---------------------------------------------------------------------------
// simulation half

struct SimOutputs {
    std::optional<SimulationResult> main;
    std::optional<SimulationResult> ev;
};

double survival_bin_width(const std::optional<TailAsymptotic>& t) {
    const double alpha = t ? t->alpha : 1.0;
    return 0.01 / alpha;
}

SimOutputs simulate_all(const RunConfig& cfg, const std::vector<Functional>& fs, unsigned threads) {
    SimOutputs out;
    Probes pr;
    pr.thetas = cfg.theta_grid;
    // grid over [0, q_0.9995] of the analytic marginals (unit coefficient)
    Vec2 upper{10.0, 10.0};
    for (int k = 0; k < 2; ++k)
        if (fs[k].tail) upper[k] = std::log(2000.0) / fs[k].tail->alpha;
    pr.occupation = HistogramSpec{upper, 400};
    for (const auto& f : fs) pr.survivals.push_back({f.name, f.direction, survival_bin_width(f.tail), 2400});
    out.main = run_simulation(cfg.model, cfg.sim, pr, threads);

    if (cfg.ev.enabled) {
        SimConfig ec = cfg.sim;
        ec.dt = cfg.ev.dt;
        ec.seed = cfg.sim.seed ^ 0x5bd1e9955bd1e995ULL;
        const std::size_t reps = static_cast<std::size_t>(cfg.sim.replications);
        const std::size_t blocks_per_rep = (static_cast<std::size_t>(cfg.ev.blocks) + reps - 1) / reps;
        const std::size_t per_rep = blocks_per_rep * static_cast<std::size_t>(cfg.ev.block_size);
        const double e_t = local_time_rates(cfg.model).rates.e_T1;
        // SRBM time needed for per_rep samples of spacing s in sticky time, with margin
        ec.horizon = ec.burn_in + 1.05 * static_cast<double>(per_rep) * cfg.ev.sample_spacing * e_t + 100.0;
        Probes ep;
        ep.sample_spacing = cfg.ev.sample_spacing;
        ep.max_samples = per_rep;
        out.ev = run_simulation(cfg.model, ec, ep, threads);
    }
    return out;
}

TailTable tail_table(const SurvivalCurve& c, const std::optional<TailFit>& fit) {
    TailTable t;
    t.name = c.name;
    // rows up to the last positive survival, at most about 600 of them
    std::size_t last = 0;
    for (std::size_t j = 1; j < c.t.size(); ++j)
        if (c.survival[j] > 0) last = j;
    const std::size_t stride = std::max<std::size_t>(1, last / 600);
    for (std::size_t j = stride; j <= last; j += stride) {
        t.t.push_back(c.t[j]);
        t.empirical.push_back(c.survival[j]);
        t.fitted.push_back(fit ? fit->fitted_survival(c.t[j]) : std::nan(""));
        t.lower.push_back(c.lower[j]);
        t.upper.push_back(c.upper[j]);
    }
    return t;
}

struct Fill {
    const RunConfig& cfg;
    const std::vector<Functional>& fs;
    VerificationReport& rep;
    bool verdicts;

    void verdict(Verdict v) {
        if (verdicts) rep.verdicts.push_back(std::move(v));
    }

    void failed(const std::string& name, const std::string& tol, double threshold, const Error& e) {
        verdict({name, false, std::nan(""), tol, threshold, e.what()});
    }

    void main_run(const SimulationResult& res) {
        const auto& tol = cfg.tolerances;
        const auto& reps = res.replications;
        Json s;
        const auto est = estimate_local_time_rates(reps);
        const auto exact = local_time_rates(cfg.model).rates;
        s["local_time_rates"] = {
            {"e_T1", est.rates.e_T1},       {"e_L1", est.rates.e_L1},       {"e_L2", est.rates.e_L2},
            {"se_T1", est.std_error.e_T1},  {"se_L1", est.std_error.e_L1},  {"se_L2", est.std_error.e_L2},
            {"replications", est.replications}};
        const double worst_rate = std::max({std::abs(est.rates.e_T1 / exact.e_T1 - 1),
                                            std::abs(est.rates.e_L1 / exact.e_L1 - 1),
                                            std::abs(est.rates.e_L2 / exact.e_L2 - 1)});
        verdict({"local_time_rates", worst_rate <= tol.local_time_rel, worst_rate, "tolerances.local_time_rel",
                 tol.local_time_rel, "largest relative error of (E[T(1)], E[L1], E[L2])"});

        if (const auto occ = res.pooled_occupation()) {
            s["occupation"] = {{"interior_mass", occ->interior_mass / occ->total},
                               {"face1_mass", occ->face_masses[0] / occ->total},
                               {"face2_mass", occ->face_masses[1] / occ->total},
                               {"interior_overflow", occ->interior_overflow / occ->total},
                               {"grid_upper", {occ->grid.upper[0], occ->grid.upper[1]}},
                               {"bins", occ->grid.bins}};
            OccupationTable t;
            const auto n = occ->grid.bins;
            const double hx = occ->grid.upper[0] / n, hy = occ->grid.upper[1] / n;
            for (std::size_t i = 0; i < n; ++i) {
                if (occ->face2[i] > 0) {
                    t.x.push_back((i + 0.5) * hx);
                    t.y.push_back(0.0);
                    t.mass.push_back(occ->face2[i] / occ->total);
                }
            }
            for (std::size_t j = 0; j < n; ++j) {
                if (occ->face1[j] > 0) {
                    t.x.push_back(0.0);
                    t.y.push_back((j + 0.5) * hy);
                    t.mass.push_back(occ->face1[j] / occ->total);
                }
            }
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    const double m = occ->interior[i * n + j];
                    if (m > 0) {
                        t.x.push_back((i + 0.5) * hx);
                        t.y.push_back((j + 0.5) * hy);
                        t.mass.push_back(m / occ->total);
                    }
                }
            rep.occupation = std::move(t);
        }

        Json bar = Json::array();
        double worst = 0.0;
        for (const auto& th : cfg.theta_grid) {
            const auto b = bar_residual(th, reps, cfg.model);
            worst = std::max(worst, b.residual);
            bar.push_back({{"theta", {th[0], th[1]}},
                           {"psi", b.psi},
                           {"phi", b.phi},
                           {"phi0", b.phi0},
                           {"phi1", b.phi1},
                           {"phi2", b.phi2},
                           {"residual", b.residual},
                           {"residual_interior", b.residual_interior}});
        }
        rep.residuals["bar"] = bar;
        if (!cfg.theta_grid.empty())
            verdict({"bar_residual", worst <= tol.bar_residual, worst, "tolerances.bar_residual", tol.bar_residual,
                     "largest relative residual over theta_grid"});

        Json tails;
        for (std::size_t i = 0; i < fs.size(); ++i) {
            const auto& f = fs[i];
            const auto curve = survival_curve(reps, i, f.name, f.direction);
            std::optional<TailFit> fit;
            const std::string vname = "tail." + f.name;
            if (!f.tail) {
                tails[f.name] = error_json(*f.error);
                failed(vname, "tolerances.tail_alpha_rel", tol.tail_alpha_rel, *f.error);
                rep.tails.push_back(tail_table(curve, fit));
                continue;
            }
            try {
                fit = survival_and_fit(curve, f.tail->p);
                const auto k = fit_tail_coefficient(curve, f.tail->alpha, f.tail->p, fit->window);
                tails[f.name] = {{"alpha_hat", fit->alpha_hat},
                                 {"alpha_se", fit->alpha_se},
                                 {"p_fixed", fit->p_fixed},
                                 {"alpha_free", fit->alpha_free},
                                 {"p_free", fit->p_free},
                                 {"window", {fit->window.lo, fit->window.hi}},
                                 {"points", fit->points},
                                 {"k_hat", {{"value", k.value}, {"lower", k.lower}, {"upper", k.upper}}},
                                 {"effective_samples", curve.effective_samples}};
                const double rel = std::abs(fit->alpha_hat / f.tail->alpha - 1);
                verdict({vname, rel <= tol.tail_alpha_rel, fit->alpha_hat, "tolerances.tail_alpha_rel",
                         tol.tail_alpha_rel,
                         "fitted decay rate vs analytic " + fmt(f.tail->alpha) + " (p fixed at " + fmt(f.tail->p) +
                             ")"});
            } catch (const Error& e) {
                tails[f.name] = error_json(e);
                failed(vname, "tolerances.tail_alpha_rel", tol.tail_alpha_rel, e);
            }
            rep.tails.push_back(tail_table(curve, fit));
        }
        s["tails"] = tails;
        rep.simulated["main"] = s;
    }

    void ev_run(const SimulationResult& res) {
        const auto& tol = cfg.tolerances;
        Json s;
        const auto samples = res.pooled_samples();
        s["dt"] = res.cfg.dt;
        s["sample_spacing"] = cfg.ev.sample_spacing;
        s["samples"] = samples.size();
        if (!fs[0].tail || !fs[1].tail) {
            s["error"] = "marginal classification failed";
            rep.simulated["extremes"] = s;
            return;
        }
        const auto& t1 = *fs[0].tail;
        const auto& t2 = *fs[1].tail;
        std::optional<Estimate> k1, k2;
        try {
            const auto c1 = survival_curve(samples, {1, 0}, survival_bin_width(t1), 2400, 8, "axis1");
            const auto c2 = survival_curve(samples, {0, 1}, survival_bin_width(t2), 2400, 8, "axis2");
            k1 = fit_tail_coefficient(c1, t1.alpha, t1.p);
            k2 = fit_tail_coefficient(c2, t2.alpha, t2.p);
            s["k_hat"] = {{"axis1", {{"value", k1->value}, {"lower", k1->lower}, {"upper", k1->upper}}},
                          {"axis2", {{"value", k2->value}, {"lower", k2->lower}, {"upper", k2->upper}}},
                          {"window", "[q0.90, q0.999]"}};
        } catch (const Error& e) {
            s["k_hat"] = error_json(e);
        }

        // Gumbel check on axis-1 block maxima within each replication
        try {
            if (!k1) throw Error(ErrorCode::InsufficientTailData, "no coefficient estimate for axis 1");
            const auto n = ev_norming(cfg.ev.block_size, t1, k1->value);
            std::vector<double> maxima;
            const auto bs = static_cast<std::size_t>(cfg.ev.block_size);
            for (const auto& r : res.replications)
                for (std::size_t b = 0; b + bs <= r.samples.size(); b += bs) {
                    if (maxima.size() == static_cast<std::size_t>(cfg.ev.blocks)) break;
                    double m = -kInf;
                    for (std::size_t i = b; i < b + bs; ++i) m = std::max(m, r.samples[i][0]);
                    maxima.push_back((m - n.b_n) / n.a_n);
                }
            if (maxima.size() < static_cast<std::size_t>(cfg.ev.blocks))
                throw Error(ErrorCode::InsufficientSamples, "only " + std::to_string(maxima.size()) + " of " +
                                                                std::to_string(cfg.ev.blocks) + " blocks filled");
            const double ks = ks_distance(maxima, [](double x) { return gumbel_cdf(x); });
            s["gumbel"] = {{"blocks", maxima.size()},
                           {"block_size", cfg.ev.block_size},
                           {"a_n", n.a_n},
                           {"b_n", n.b_n},
                           {"k_used", k1->value},
                           {"ks_distance", ks}};
            verdict({"gumbel_ks", ks < tol.gumbel_ks, ks, "tolerances.gumbel_ks", tol.gumbel_ks,
                     "Kolmogorov-Smirnov distance of normalized axis-1 block maxima from the Gumbel law"});
            std::sort(maxima.begin(), maxima.end());
            GumbelTable g;
            for (std::size_t i = 0; i < maxima.size(); ++i) {
                if (i + 1 < maxima.size() && maxima[i + 1] == maxima[i]) continue;
                g.x.push_back(maxima[i]);
                g.empirical_cdf.push_back(static_cast<double>(i + 1) / maxima.size());
                g.model_cdf.push_back(gumbel_cdf(maxima[i]));
            }
            rep.gumbel = std::move(g);
        } catch (const Error& e) {
            s["gumbel"] = error_json(e);
            failed("gumbel_ks", "tolerances.gumbel_ks", tol.gumbel_ks, e);
        }

        if (!reflection_is_substochastic(cfg.model.refl)) {
            s["independence"] = {{"notice", "ReflectionNotSubstochastic"}};
            rep.simulated["extremes"] = s;
            return;
        }
        try {
            const auto ind = independence_diagnostic(samples, cfg.ev.independence_grid);
            Json pts = Json::array();
            for (const auto& p : ind.points)
                pts.push_back({{"t", p.t},
                               {"ratio", p.ratio},
                               {"lower", p.lower},
                               {"upper", p.upper},
                               {"conditioning", p.conditioning},
                               {"joint", p.joint}});
            s["independence"] = {{"points", pts}, {"truncated", ind.truncated}, {"decreasing", ind.decreasing}};
            const double last = ind.points.back().ratio;
            const bool ok = ind.decreasing && !ind.truncated && last < tol.independence_ratio;
            verdict({"independence", ok, last, "tolerances.independence_ratio", tol.independence_ratio,
                     "r(t) decreasing over ev.independence_grid and below the threshold at its last point"});
        } catch (const Error& e) {
            s["independence"] = error_json(e);
            failed("independence", "tolerances.independence_ratio", tol.independence_ratio, e);
        }
        try {
            if (!k1 || !k2) throw Error(ErrorCode::InsufficientTailData, "no coefficient estimates");
            const auto m = make_joint_tail_model(t1, t2, Estimate{k1->value * k2->value, k1->lower * k2->lower,
                                                                   k1->upper * k2->upper});
            const auto& jp = cfg.ev.joint_point;
            const double predicted = joint_tail_eval(jp[0], jp[1], m);
            const double empirical = joint_survival(samples, jp[0], jp[1]);
            const double ratio = empirical / predicted;
            s["joint_survival"] = {{"point", {jp[0], jp[1]}},
                                   {"empirical", empirical},
                                   {"predicted", predicted},
                                   {"ratio", ratio}};
            const bool ok = ratio >= 1.0 / tol.joint_factor && ratio <= tol.joint_factor;
            verdict({"joint_survival", ok, ratio, "tolerances.joint_factor", tol.joint_factor,
                     "empirical joint survival over the product-form prediction"});
        } catch (const Error& e) {
            s["joint_survival"] = error_json(e);
            failed("joint_survival", "tolerances.joint_factor", tol.joint_factor, e);
        }
        rep.simulated["extremes"] = s;
    }
};

VerificationReport base_report(const RunConfig& cfg, const std::string& command, std::vector<Functional>& fs) {
    VerificationReport r;
    r.command = command;
    r.config = config_to_json(cfg);
    fs = functionals(cfg);
    r.analytic = analytic_json(cfg, fs);
    r.simulated = Json::object();
    r.residuals = Json::object();
    return r;
}

VerificationReport simulate_report(const RunConfig& cfg, const std::string& command, bool verdicts,
                                   unsigned threads) {
    std::vector<Functional> fs;
    auto rep = base_report(cfg, command, fs);
    Fill fill{cfg, fs, rep, verdicts};
    const auto out = simulate_all(cfg, fs, threads);
    rep.simulated["config"] = {{"dt", cfg.sim.dt},
                               {"horizon", cfg.sim.horizon},
                               {"burn_in", cfg.sim.burn_in},
                               {"replications", cfg.sim.replications},
                               {"seed", cfg.sim.seed}};
    fill.main_run(*out.main);
    if (out.ev) fill.ev_run(*out.ev);
    return rep;
}

}  // namespace

bool VerificationReport::passed() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

Json VerificationReport::to_json() const {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = command;
    j["config"] = config;
    j["analytic"] = analytic;
    if (!simulated.empty()) j["simulated"] = simulated;
    if (!residuals.empty()) j["residuals"] = residuals;
    if (command == "verify") {
        j["verdicts"] = Json::array();
        for (const auto& v : verdicts) j["verdicts"].push_back(verdict_json(v));
        j["passed"] = passed();
    }
    return j;
}

VerificationReport run_analyze(const RunConfig& cfg) {
    std::vector<Functional> fs;
    return base_report(cfg, "analyze", fs);
}

VerificationReport run_simulate(const RunConfig& cfg, unsigned threads) {
    return simulate_report(cfg, "simulate", false, threads);
}

VerificationReport run_verify(const RunConfig& cfg, unsigned threads) {
    return simulate_report(cfg, "verify", true, threads);
}

// ---------------------------------------------------------------------------
// emission

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    f.precision(17);
    return f;
}

void flatten(const Json& j, const std::string& prefix, std::ofstream& out) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), out);
    } else {
        std::string v = j.is_string() ? j.get<std::string>() : j.dump();
        if (v.find_first_of(",\"\n") != std::string::npos) {
            std::string q = "\"";
            for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
            v = q + "\"";
        }
        out << prefix << ',' << v << '\n';
    }
}

}  // namespace

std::vector<std::string> emit(const VerificationReport& report, const std::string& format, const std::string& dir) {
    if (format != "json" && format != "csv") throw Error(ErrorCode::InvalidArgument, "format must be json or csv");
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());
    std::vector<std::string> written;
    const fs::path base(dir);

    if (format == "json") {
        auto f = open_out(base / "report.json");
        f << report.to_json().dump(2) << '\n';
        if (!f) throw Error(ErrorCode::IoError, "write failed for report.json");
        written.push_back((base / "report.json").string());
    } else {
        auto f = open_out(base / "summary.csv");
        f << "key,value\n";
        flatten(report.to_json(), "", f);
        written.push_back((base / "summary.csv").string());
    }
    for (const auto& t : report.tails) {
        const auto p = base / ("tails_" + t.name + ".csv");
        auto f = open_out(p);
        f << "t,empirical_survival,fitted_survival,lower_ci,upper_ci\n";
        for (std::size_t i = 0; i < t.t.size(); ++i)
            f << t.t[i] << ',' << t.empirical[i] << ',' << t.fitted[i] << ',' << t.lower[i] << ',' << t.upper[i]
              << '\n';
        if (!f) throw Error(ErrorCode::IoError, "write failed for " + p.string());
        written.push_back(p.string());
    }
    if (report.occupation) {
        const auto p = base / "occupation.csv";
        auto f = open_out(p);
        f << "x,y,mass\n";
        const auto& o = *report.occupation;
        for (std::size_t i = 0; i < o.x.size(); ++i) f << o.x[i] << ',' << o.y[i] << ',' << o.mass[i] << '\n';
        if (!f) throw Error(ErrorCode::IoError, "write failed for " + p.string());
        written.push_back(p.string());
    }
    if (report.gumbel) {
        const auto p = base / "gumbel.csv";
        auto f = open_out(p);
        f << "normalized_maximum,empirical_cdf,gumbel_cdf\n";
        const auto& g = *report.gumbel;
        for (std::size_t i = 0; i < g.x.size(); ++i)
            f << g.x[i] << ',' << g.empirical_cdf[i] << ',' << g.model_cdf[i] << '\n';
        if (!f) throw Error(ErrorCode::IoError, "write failed for " + p.string());
        written.push_back(p.string());
    }
    return written;
}

}  // namespace stickytail
