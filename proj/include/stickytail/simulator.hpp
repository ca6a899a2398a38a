#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stickytail/model.hpp"
#include "stickytail/rng.hpp"

namespace stickytail {

struct SimConfig {
    double dt = 1e-3;
    double horizon = 1e4;  // SRBM-clock time simulated after burn-in
    double burn_in = 1e2;
    int replications = 8;
    std::uint64_t seed = 0;
};

void check_sim_config(const SimConfig& cfg);

struct ReflectResult {
    Vec2 z{};
    Vec2 dl{};
};

/// One-step Skorokhod problem in the quadrant: z = w + R dl, z >= 0, dl >= 0,
/// z_i dl_i = 0. Closed form over the four complementarity patterns.
ReflectResult reflect_step(const Vec2& w, const Mat2& refl);

/// Euler step followed by the complementarity projection.
class SrbmStepper {
public:
    SrbmStepper(const ModelParams& params, double dt, std::uint64_t seed, std::uint64_t replication,
                Vec2 start = {0.0, 0.0});

    const ReflectResult& step();
    const Vec2& position() const noexcept { return z_; }
    double dt() const noexcept { return dt_; }

private:
    Mat2 refl_;
    Mat2 chol_;
    Vec2 drift_;
    double sqrt_dt_;
    double dt_;
    GaussianStream normals_;
    Vec2 z_;
    ReflectResult last_;
};

/// A recorded path on the dt-grid (every `stride`-th step) after burn-in. Clocks,
/// local times and the sticky clock restart from zero at the end of burn-in.
struct SrbmPath {
    double dt = 0.0;
    Vec2 stick{};
    std::vector<double> time;
    std::vector<Vec2> positions;
    std::vector<Vec2> local_times;
    std::vector<double> sticky_clock;
};

SrbmPath simulate_srbm(const ModelParams& params, const SimConfig& cfg, std::uint64_t replication = 0,
                       std::size_t stride = 1);

struct StickyPositions {
    std::vector<double> t;        // sticky time
    std::vector<double> srbm_time;  // T(t)
    std::vector<Vec2> z;          // Z(t) = Z~(T(t))
};

/// Inverts the piecewise-linear sticky clock on `t_grid`.
StickyPositions sticky_clock_invert(const SrbmPath& path, std::span<const double> t_grid);

// ---------------------------------------------------------------------------
// Streaming accumulators. A replication feeds every step into these without
// storing the path.

struct ClockTotals {
    double srbm_time = 0.0;
    Vec2 local_time{};
    double sticky = 0.0;
    std::uint64_t steps = 0;
};

struct HistogramSpec {
    Vec2 upper{1.0, 1.0};
    std::size_t bins = 400;
};

/// Stationary occupation split into the SRBM-time part and the sticky face parts.
struct OccupationEstimate {
    HistogramSpec grid;
    std::vector<double> interior;  // bins x bins, row-major in z1
    std::vector<double> face1;     // z1 = 0, binned in z2
    std::vector<double> face2;     // z2 = 0, binned in z1
    double interior_mass = 0.0;    // includes interior_overflow
    double interior_overflow = 0.0;
    Vec2 face_masses{};            // u_i sum dL_i, including overflow
    Vec2 face_overflow{};
    double total = 0.0;            // sticky-time normalizer

    void add_interior(const Vec2& z, double w);
    void add_face(int face, const Vec2& z, double w);
    void merge(const OccupationEstimate& other);
};

OccupationEstimate make_occupation(const HistogramSpec& grid);

/// Sums of exp(<theta, z>) weighted by dt and by dL_i.
struct MgfSums {
    std::vector<Vec2> thetas;
    std::vector<double> interior;
    std::vector<double> face1;
    std::vector<double> face2;
};

struct SurvivalSpec {
    std::string name;
    Vec2 direction{1.0, 0.0};
    double bin_width = 0.01;
    std::size_t bins = 2000;
};

/// Sticky-time weighted histogram of <direction, Z>.
struct WeightedHistogram {
    double bin_width = 0.0;
    std::vector<double> weights;
    double overflow = 0.0;
    double total = 0.0;
};

struct Probes {
    std::vector<Vec2> thetas;
    std::optional<HistogramSpec> occupation;
    std::vector<SurvivalSpec> survivals;
    double sample_spacing = 0.0;  // sticky time between stored stationary samples; 0 disables
    std::size_t max_samples = 50'000'000;
};

struct ReplicationStats {
    ClockTotals clocks;
    std::optional<OccupationEstimate> occupation;
    MgfSums mgf;
    std::vector<WeightedHistogram> survivals;
    std::vector<Vec2> samples;
};

struct SimulationResult {
    ModelParams params;
    SimConfig cfg;
    Probes probes;
    std::vector<ReplicationStats> replications;

    std::vector<Vec2> pooled_samples() const;
    std::optional<OccupationEstimate> pooled_occupation() const;
};

ReplicationStats run_replication(const ModelParams& params, const SimConfig& cfg, const Probes& probes,
                                 std::uint64_t replication);

/// Runs all replications (concurrently when `threads` > 1) and keeps them in index order.
SimulationResult run_simulation(const ModelParams& params, const SimConfig& cfg, const Probes& probes,
                                unsigned threads = 0);

// ---------------------------------------------------------------------------
// Binary trace: header "STKTRACE" u32 version, f64 dt, f64 horizon, u64 seed,
// u64 replication, u64 record count; then records of five little-endian f64
// (t, z1, z2, L1, L2).

inline constexpr std::uint32_t kTraceVersion = 1;

void write_trace(const std::string& file, const SrbmPath& path, const SimConfig& cfg, std::uint64_t replication);

struct TraceFile {
    std::uint32_t version = 0;
    double dt = 0.0;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t replication = 0;
    std::vector<std::array<double, 5>> records;
};

TraceFile read_trace(const std::string& file);

}  // namespace stickytail
