#include "stickytail/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <thread>

#include "stickytail/error.hpp"

namespace stickytail {

namespace {

constexpr double kFeasTol = 1e-13;

std::uint64_t step_count(double span, double dt) {
    return static_cast<std::uint64_t>(std::llround(span / dt));
}

bool feasible(double v, double scale) { return v >= -kFeasTol * scale; }

}  // namespace

void check_sim_config(const SimConfig& cfg) {
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt))
        throw Error(ErrorCode::ValidationError, "sim.dt must be positive");
    if (!(cfg.burn_in >= 0.0) || !std::isfinite(cfg.burn_in))
        throw Error(ErrorCode::ValidationError, "sim.burn_in must be nonnegative");
    if (!(cfg.horizon > cfg.burn_in) || !std::isfinite(cfg.horizon))
        throw Error(ErrorCode::ValidationError, "sim.horizon must exceed sim.burn_in");
    if (cfg.replications < 1) throw Error(ErrorCode::ValidationError, "sim.replications must be >= 1");
    if (step_count(cfg.horizon, cfg.dt) < 1) throw Error(ErrorCode::ValidationError, "sim.horizon shorter than dt");
}

ReflectResult reflect_step(const Vec2& w, const Mat2& r) {
    const double scale = 1.0 + std::abs(w[0]) + std::abs(w[1]);
    if (w[0] >= 0.0 && w[1] >= 0.0) return {w, {0.0, 0.0}};

    // push face 1 only
    if (r[0][0] > 0.0) {
        const double d1 = -w[0] / r[0][0];
        const double z2 = w[1] + r[1][0] * d1;
        if (d1 >= 0.0 && feasible(z2, scale)) return {{0.0, std::max(z2, 0.0)}, {d1, 0.0}};
    }
    // push face 2 only
    if (r[1][1] > 0.0) {
        const double d2 = -w[1] / r[1][1];
        const double z1 = w[0] + r[0][1] * d2;
        if (d2 >= 0.0 && feasible(z1, scale)) return {{std::max(z1, 0.0), 0.0}, {0.0, d2}};
    }
    // push both: R dL = -w
    const double dr = det(r);
    if (dr != 0.0) {
        const double d1 = (-w[0] * r[1][1] + w[1] * r[0][1]) / dr;
        const double d2 = (-w[1] * r[0][0] + w[0] * r[1][0]) / dr;
        if (feasible(d1, scale) && feasible(d2, scale))
            return {{0.0, 0.0}, {std::max(d1, 0.0), std::max(d2, 0.0)}};
    }
    throw Error(ErrorCode::NoComplementarySolution, "no complementary solution for reflection step");
}

SrbmStepper::SrbmStepper(const ModelParams& params, double dt, std::uint64_t seed, std::uint64_t replication,
                         Vec2 start)
    : refl_(params.refl),
      chol_(cholesky(params.sigma)),
      drift_{params.mu[0] * dt, params.mu[1] * dt},
      sqrt_dt_(std::sqrt(dt)),
      dt_(dt),
      normals_(seed, replication),
      z_(start) {}

const ReflectResult& SrbmStepper::step() {
    const auto xi = normals_.next_pair();
    const Vec2 w{z_[0] + drift_[0] + sqrt_dt_ * chol_[0][0] * xi[0],
                 z_[1] + drift_[1] + sqrt_dt_ * (chol_[1][0] * xi[0] + chol_[1][1] * xi[1])};
    last_ = reflect_step(w, refl_);
    z_ = last_.z;
    return last_;
}

SrbmPath simulate_srbm(const ModelParams& params, const SimConfig& cfg, std::uint64_t replication,
                       std::size_t stride) {
    validate(params);
    check_sim_config(cfg);
    if (stride == 0) throw Error(ErrorCode::InvalidArgument, "record stride must be positive");
    SrbmStepper stepper(params, cfg.dt, cfg.seed, replication);
    const auto burn = step_count(cfg.burn_in, cfg.dt);
    const auto n = step_count(cfg.horizon, cfg.dt);
    for (std::uint64_t i = 0; i < burn; ++i) stepper.step();

    SrbmPath path;
    path.dt = cfg.dt * static_cast<double>(stride);
    path.stick = params.stick;
    const std::size_t records = static_cast<std::size_t>(n / stride) + 1;
    path.time.reserve(records);
    path.positions.reserve(records);
    path.local_times.reserve(records);
    path.sticky_clock.reserve(records);
    Vec2 l{0.0, 0.0};
    double s = 0.0;
    path.time.push_back(0.0);
    path.positions.push_back(stepper.position());
    path.local_times.push_back(l);
    path.sticky_clock.push_back(0.0);
    for (std::uint64_t i = 1; i <= n; ++i) {
        const auto& st = stepper.step();
        l[0] += st.dl[0];
        l[1] += st.dl[1];
        s += cfg.dt + params.stick[0] * st.dl[0] + params.stick[1] * st.dl[1];
        if (i % stride == 0) {
            path.time.push_back(static_cast<double>(i) * cfg.dt);
            path.positions.push_back(st.z);
            path.local_times.push_back(l);
            path.sticky_clock.push_back(s);
        }
    }
    return path;
}

StickyPositions sticky_clock_invert(const SrbmPath& path, std::span<const double> t_grid) {
    StickyPositions out;
    if (path.sticky_clock.empty()) throw Error(ErrorCode::GridOutOfRange, "empty path");
    const auto& s = path.sticky_clock;
    const double s_max = s.back();
    out.t.reserve(t_grid.size());
    out.srbm_time.reserve(t_grid.size());
    out.z.reserve(t_grid.size());
    for (double t : t_grid) {
        if (!(t >= s.front() && t <= s_max))
            throw Error(ErrorCode::GridOutOfRange,
                        "sticky time " + std::to_string(t) + " outside [0, " + std::to_string(s_max) + "]");
        const auto it = std::lower_bound(s.begin(), s.end(), t);
        std::size_t j = static_cast<std::size_t>(it - s.begin());
        double srbm_t;
        Vec2 z;
        if (j == 0) {
            srbm_t = path.time[0];
            z = path.positions[0];
        } else {
            const double s0 = s[j - 1], s1 = s[j];
            const double f = (t - s0) / (s1 - s0);
            srbm_t = path.time[j - 1] + f * (path.time[j] - path.time[j - 1]);
            // the whole clock increment of a step, boundary time included, is
            // attributed to the post-step point, as in the occupation estimator
            z = path.positions[j];
        }
        out.t.push_back(t);
        out.srbm_time.push_back(srbm_t);
        out.z.push_back(z);
    }
    return out;
}

OccupationEstimate make_occupation(const HistogramSpec& grid) {
    if (grid.bins == 0 || !(grid.upper[0] > 0.0) || !(grid.upper[1] > 0.0))
        throw Error(ErrorCode::InvalidArgument, "occupation grid needs positive bins and range");
    OccupationEstimate o;
    o.grid = grid;
    o.interior.assign(grid.bins * grid.bins, 0.0);
    o.face1.assign(grid.bins, 0.0);
    o.face2.assign(grid.bins, 0.0);
    return o;
}

namespace {

inline std::size_t cell(double x, double upper, std::size_t bins, bool& overflow) {
    const double f = x / upper * static_cast<double>(bins);
    if (f >= static_cast<double>(bins)) {
        overflow = true;
        return bins;
    }
    return static_cast<std::size_t>(std::max(f, 0.0));
}

}  // namespace

void OccupationEstimate::add_interior(const Vec2& z, double w) {
    interior_mass += w;
    total = interior_mass + face_masses[0] + face_masses[1];
    bool over = false;
    const auto i = cell(z[0], grid.upper[0], grid.bins, over);
    const auto j = cell(z[1], grid.upper[1], grid.bins, over);
    if (over)
        interior_overflow += w;
    else
        interior[i * grid.bins + j] += w;
}

void OccupationEstimate::add_face(int face, const Vec2& z, double w) {
    const int k = face - 1;
    face_masses[k] += w;
    total = interior_mass + face_masses[0] + face_masses[1];
    bool over = false;
    const auto i = cell(z[1 - k], grid.upper[1 - k], grid.bins, over);
    if (over)
        face_overflow[k] += w;
    else
        (k == 0 ? face1 : face2)[i] += w;
}

void OccupationEstimate::merge(const OccupationEstimate& o) {
    if (o.grid.bins != grid.bins || o.grid.upper != grid.upper)
        throw Error(ErrorCode::InvalidArgument, "cannot merge occupation estimates on different grids");
    for (std::size_t i = 0; i < interior.size(); ++i) interior[i] += o.interior[i];
    for (std::size_t i = 0; i < face1.size(); ++i) {
        face1[i] += o.face1[i];
        face2[i] += o.face2[i];
    }
    interior_mass += o.interior_mass;
    interior_overflow += o.interior_overflow;
    for (int k = 0; k < 2; ++k) {
        face_masses[k] += o.face_masses[k];
        face_overflow[k] += o.face_overflow[k];
    }
    total = interior_mass + face_masses[0] + face_masses[1];
}

namespace {

// exp(theta1 z1) and exp(theta2 z2) are computed once per distinct coordinate.
struct MgfPlan {
    std::vector<double> t1, t2;
    std::vector<std::pair<std::size_t, std::size_t>> index;
    std::vector<double> e1, e2;

    explicit MgfPlan(const std::vector<Vec2>& thetas) {
        for (const auto& th : thetas) {
            auto find = [](std::vector<double>& v, double x) {
                auto it = std::find(v.begin(), v.end(), x);
                if (it != v.end()) return static_cast<std::size_t>(it - v.begin());
                v.push_back(x);
                return v.size() - 1;
            };
            const auto a = find(t1, th[0]);
            const auto b = find(t2, th[1]);
            index.emplace_back(a, b);
        }
        e1.resize(t1.size());
        e2.resize(t2.size());
    }

    void eval(const Vec2& z) {
        for (std::size_t i = 0; i < t1.size(); ++i) e1[i] = std::exp(t1[i] * z[0]);
        for (std::size_t i = 0; i < t2.size(); ++i) e2[i] = std::exp(t2[i] * z[1]);
    }
};

struct HistAcc {
    Vec2 dir;
    double inv_width;
    WeightedHistogram h;

    void add(const Vec2& z, double w) {
        const double x = dot(dir, z) * inv_width;
        h.total += w;
        if (x >= static_cast<double>(h.weights.size()))
            h.overflow += w;
        else
            h.weights[static_cast<std::size_t>(std::max(x, 0.0))] += w;
    }
};

}  // namespace

ReplicationStats run_replication(const ModelParams& params, const SimConfig& cfg, const Probes& probes,
                                 std::uint64_t replication) {
    validate(params);
    check_sim_config(cfg);
    ReplicationStats out;
    if (probes.occupation) out.occupation = make_occupation(*probes.occupation);
    out.mgf.thetas = probes.thetas;
    out.mgf.interior.assign(probes.thetas.size(), 0.0);
    out.mgf.face1.assign(probes.thetas.size(), 0.0);
    out.mgf.face2.assign(probes.thetas.size(), 0.0);
    MgfPlan plan(probes.thetas);
    std::vector<HistAcc> hists;
    for (const auto& spec : probes.survivals) {
        if (!(spec.bin_width > 0.0) || spec.bins == 0)
            throw Error(ErrorCode::InvalidArgument, "survival histogram '" + spec.name + "' needs positive width");
        HistAcc acc{spec.direction, 1.0 / spec.bin_width, {}};
        acc.h.bin_width = spec.bin_width;
        acc.h.weights.assign(spec.bins, 0.0);
        hists.push_back(std::move(acc));
    }

    SrbmStepper stepper(params, cfg.dt, cfg.seed, replication);
    const auto burn = step_count(cfg.burn_in, cfg.dt);
    const auto n = step_count(cfg.horizon, cfg.dt);
    for (std::uint64_t i = 0; i < burn; ++i) stepper.step();

    const double dt = cfg.dt;
    const Vec2 u = params.stick;
    const bool sampling = probes.sample_spacing > 0.0;
    double next_sample = probes.sample_spacing;
    double clock = 0.0;
    ClockTotals& c = out.clocks;
    for (std::uint64_t i = 0; i < n; ++i) {
        const auto& st = stepper.step();
        const Vec2& z = st.z;
        const double f1 = u[0] * st.dl[0];
        const double f2 = u[1] * st.dl[1];
        c.local_time[0] += st.dl[0];
        c.local_time[1] += st.dl[1];
        c.srbm_time += dt;
        clock += dt + f1 + f2;
        if (out.occupation) {
            out.occupation->add_interior(z, dt);
            if (st.dl[0] > 0.0) out.occupation->add_face(1, z, f1);
            if (st.dl[1] > 0.0) out.occupation->add_face(2, z, f2);
        }
        if (!plan.index.empty()) {
            plan.eval(z);
            for (std::size_t k = 0; k < plan.index.size(); ++k) {
                const double e = plan.e1[plan.index[k].first] * plan.e2[plan.index[k].second];
                out.mgf.interior[k] += dt * e;
                out.mgf.face1[k] += st.dl[0] * e;
                out.mgf.face2[k] += st.dl[1] * e;
            }
        }
        for (auto& h : hists) h.add(z, dt + f1 + f2);
        if (sampling) {
            while (clock >= next_sample && out.samples.size() < probes.max_samples) {
                out.samples.push_back(z);
                next_sample += probes.sample_spacing;
            }
        }
    }
    c.steps = n;
    // the normalizer is the clock identity itself, so the rate estimates add up exactly
    c.sticky = c.srbm_time + u[0] * c.local_time[0] + u[1] * c.local_time[1];
    for (auto& h : hists) out.survivals.push_back(std::move(h.h));
    return out;
}

SimulationResult run_simulation(const ModelParams& params, const SimConfig& cfg, const Probes& probes,
                                unsigned threads) {
    validate(params);
    check_sim_config(cfg);
    SimulationResult res{params, cfg, probes, {}};
    const auto reps = static_cast<std::size_t>(cfg.replications);
    res.replications.resize(reps);
    if (threads <= 1 || reps == 1) {
        for (std::size_t r = 0; r < reps; ++r) res.replications[r] = run_replication(params, cfg, probes, r);
        return res;
    }
    std::vector<std::exception_ptr> errors(reps);
    std::vector<std::thread> pool;
    const unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(reps));
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t r = w; r < reps; r += workers) {
                try {
                    res.replications[r] = run_replication(params, cfg, probes, r);
                } catch (...) {
                    errors[r] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return res;
}

std::vector<Vec2> SimulationResult::pooled_samples() const {
    std::vector<Vec2> out;
    std::size_t n = 0;
    for (const auto& r : replications) n += r.samples.size();
    out.reserve(n);
    for (const auto& r : replications) out.insert(out.end(), r.samples.begin(), r.samples.end());
    return out;
}

std::optional<OccupationEstimate> SimulationResult::pooled_occupation() const {
    std::optional<OccupationEstimate> out;
    for (const auto& r : replications) {
        if (!r.occupation) continue;
        if (!out)
            out = *r.occupation;
        else
            out->merge(*r.occupation);
    }
    return out;
}

namespace {

template <class T>
void put(std::ofstream& f, T v) {
    static_assert(std::endian::native == std::endian::little, "trace format is little-endian");
    f.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::ifstream& f) {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!f) throw Error(ErrorCode::IoError, "truncated trace file");
    return v;
}

constexpr char kTraceMagic[8] = {'S', 'T', 'K', 'T', 'R', 'A', 'C', 'E'};

}  // namespace

void write_trace(const std::string& file, const SrbmPath& path, const SimConfig& cfg, std::uint64_t replication) {
    std::ofstream f(file, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + file + " for writing");
    f.write(kTraceMagic, sizeof kTraceMagic);
    put(f, kTraceVersion);
    put(f, cfg.dt);
    put(f, cfg.horizon);
    put(f, cfg.seed);
    put(f, replication);
    put(f, static_cast<std::uint64_t>(path.time.size()));
    for (std::size_t i = 0; i < path.time.size(); ++i) {
        put(f, path.time[i]);
        put(f, path.positions[i][0]);
        put(f, path.positions[i][1]);
        put(f, path.local_times[i][0]);
        put(f, path.local_times[i][1]);
    }
    if (!f) throw Error(ErrorCode::IoError, "write failed for " + file);
}

TraceFile read_trace(const std::string& file) {
    std::ifstream f(file, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + file);
    char magic[8];
    f.read(magic, sizeof magic);
    if (!f || std::memcmp(magic, kTraceMagic, sizeof magic) != 0)
        throw Error(ErrorCode::IoError, file + " is not a trace file");
    TraceFile t;
    t.version = get<std::uint32_t>(f);
    if (t.version != kTraceVersion) throw Error(ErrorCode::IoError, "unsupported trace version");
    t.dt = get<double>(f);
    t.horizon = get<double>(f);
    t.seed = get<std::uint64_t>(f);
    t.replication = get<std::uint64_t>(f);
    const auto n = get<std::uint64_t>(f);
    t.records.resize(n);
    for (auto& r : t.records)
        for (auto& v : r) v = get<double>(f);
    return t;
}

}  // namespace stickytail
