// stickytail: analyze, simulate and verify a sticky reflected Brownian motion model.
#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "stickytail/report.hpp"
#include "stickytail/simulator.hpp"

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kVerify = 3, kIo = 4 };

struct Common {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> format;
    unsigned threads = 1;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "JSON model configuration")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", c.out, "output directory (overrides output.directory)");
    cmd->add_option("--seed", c.seed, "base seed (overrides sim.seed)");
    cmd->add_option("--format", c.format, "report format (overrides output.format)")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--threads", c.threads, "worker threads for replications")->check(CLI::Range(1u, 256u));
}

stickytail::RunConfig load(const Common& c) {
    auto cfg = stickytail::parse_config(c.config);
    if (c.out) cfg.output.directory = *c.out;
    if (c.seed) cfg.sim.seed = *c.seed;
    if (c.format) cfg.output.format = *c.format;
    return cfg;
}

void write_traces(const stickytail::RunConfig& cfg, const std::string& prefix, std::size_t stride) {
    for (int r = 0; r < cfg.sim.replications; ++r) {
        const auto path = stickytail::simulate_srbm(cfg.model, cfg.sim, static_cast<std::uint64_t>(r), stride);
        const std::string file = prefix + "_rep" + std::to_string(r) + ".bin";
        stickytail::write_trace(file, path, cfg.sim, static_cast<std::uint64_t>(r));
        std::cout << "trace: " << file << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tail asymptotics of sticky reflected Brownian motion in the quadrant"};
    app.require_subcommand(1);

    Common analyze_opts, simulate_opts, verify_opts;
    auto* analyze = app.add_subcommand("analyze", "analytic quantities only");
    add_common(analyze, analyze_opts);
    auto* simulate = app.add_subcommand("simulate", "analytic quantities plus simulation estimates");
    add_common(simulate, simulate_opts);
    std::string trace_prefix;
    std::size_t trace_stride = 100;
    simulate->add_option("--trace", trace_prefix, "also write raw path traces to <prefix>_rep<i>.bin");
    simulate->add_option("--trace-stride", trace_stride, "record every n-th step in traces")
        ->check(CLI::PositiveNumber);
    auto* verify = app.add_subcommand("verify", "simulate and compare against analytic predictions");
    add_common(verify, verify_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    using stickytail::ErrorCode;
    try {
        stickytail::VerificationReport report;
        stickytail::RunConfig cfg;
        if (analyze->parsed()) {
            cfg = load(analyze_opts);
            report = stickytail::run_analyze(cfg);
        } else if (simulate->parsed()) {
            cfg = load(simulate_opts);
            report = stickytail::run_simulate(cfg, simulate_opts.threads);
            if (!trace_prefix.empty()) write_traces(cfg, trace_prefix, trace_stride);
        } else {
            cfg = load(verify_opts);
            report = stickytail::run_verify(cfg, verify_opts.threads);
        }
        for (const auto& f : stickytail::emit(report, cfg.output.format, cfg.output.directory))
            std::cout << "wrote " << f << '\n';
        if (verify->parsed()) {
            for (const auto& v : report.verdicts)
                std::cout << (v.passed ? "PASS " : "FAIL ") << v.name << "  value=" << v.value << "  "
                          << v.tolerance << "=" << v.threshold << '\n';
            if (!report.passed()) return kVerify;
        }
        return kOk;
    } catch (const stickytail::Error& e) {
        std::cerr << "stickytail: " << e.what() << '\n';
        switch (e.code()) {
            case ErrorCode::ParseError:
            case ErrorCode::ValidationError:
            case ErrorCode::InvalidArgument:
                return kConfig;
            case ErrorCode::IoError:
                return kIo;
            default:
                return kFailure;
        }
    } catch (const std::exception& e) {
        std::cerr << "stickytail: " << e.what() << '\n';
        return kFailure;
    }
}
