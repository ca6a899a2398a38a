#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stickytail/estimators.hpp"

namespace stickytail {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct EvConfig {
    bool enabled = true;
    int blocks = 500;
    int block_size = 10000;
    double dt = 1e-2;
    double sample_spacing = 8.0;  // sticky time between stationary samples
    std::vector<double> independence_grid{1.0, 1.5, 2.0, 2.5, 3.0};
    Vec2 joint_point{2.0, 2.0};
};

struct OutputConfig {
    std::string format = "json";
    std::string directory = "stickytail_out";
};

struct Tolerances {
    double local_time_rel = 0.05;
    double bar_residual = 0.03;
    double tail_alpha_rel = 0.10;
    double independence_ratio = 0.1;
    double joint_factor = 2.0;
    double gumbel_ks = 0.05;
};

struct RunConfig {
    ModelParams model;
    SimConfig sim;
    std::vector<Vec2> directions{{1.0, 1.0}};
    std::vector<Vec2> theta_grid;
    EvConfig ev;
    OutputConfig output;
    Tolerances tolerances;
};

std::vector<Vec2> default_theta_grid();

/// Strict parse: unknown keys and missing required keys ("mu", "sigma", "R", "u")
/// raise ParseError; an invalid model raises ValidationError.
RunConfig parse_config_text(const std::string& text, const std::string& source = "<config>");
RunConfig parse_config(const std::string& path);
Json config_to_json(const RunConfig& cfg);

struct Verdict {
    std::string name;
    bool passed = false;
    double value = 0.0;
    std::string tolerance;  // name of the tolerance key
    double threshold = 0.0;
    std::string detail;
};

struct TailTable {
    std::string name;
    std::vector<double> t, empirical, fitted, lower, upper;
};

struct GumbelTable {
    std::vector<double> x, empirical_cdf, model_cdf;
};

struct OccupationTable {
    std::vector<double> x, y, mass;
};

struct VerificationReport {
    std::string command;
    Json config;
    Json analytic;
    Json simulated;
    Json residuals;
    std::vector<Verdict> verdicts;
    std::vector<TailTable> tails;
    std::optional<OccupationTable> occupation;
    std::optional<GumbelTable> gumbel;

    bool passed() const;
    Json to_json() const;
};

/// Closed-form half of the report; no simulation.
VerificationReport run_analyze(const RunConfig& cfg);
/// Analytic half plus simulation estimates and plot data, without verdicts.
VerificationReport run_simulate(const RunConfig& cfg, unsigned threads = 1);
/// Everything, with pass/fail verdicts.
VerificationReport run_verify(const RunConfig& cfg, unsigned threads = 1);

/// Writes report.json (format "json") or summary.csv (format "csv"), plus
/// tails_<name>.csv, occupation.csv and gumbel.csv when available. Returns the paths.
std::vector<std::string> emit(const VerificationReport& report, const std::string& format, const std::string& dir);

}  // namespace stickytail
