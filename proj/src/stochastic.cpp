#include "sgsim/stochastic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <thread>

#include <fftw3.h>

#include "sgsim/errors.hpp"

namespace sgsim {

using std::numbers::pi;

NoisePath generate_white_path(double amplitude, double dt, double duration, std::uint64_t seed,
                              double fastest_omega)
{
    if (!(dt > 0) || !(duration > 0))
        throw ConfigError("noise path: dt and duration must be > 0");
    if (!(amplitude >= 0))
        throw ConfigError("noise path: amplitude must be >= 0");
    if (!(fastest_omega > 0))
        throw ConfigError("noise path: fastest_omega must be > 0");
    const double dt_max = 2.0 * pi / fastest_omega / 50.0;
    if (dt > dt_max * (1.0 + 1e-12))
        throw ResolutionError("noise path: dt = " + std::to_string(dt) + " s exceeds (2 pi/omega)/50 = " +
                              std::to_string(dt_max) + " s");

    NoisePath path;
    path.dt = dt;
    path.amplitude = amplitude;
    path.seed = seed;
    const auto n = static_cast<std::size_t>(std::llround(duration / dt));
    path.samples.assign(std::max<std::size_t>(n, 1), 0.0);
    if (amplitude == 0)
        return path;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, amplitude / std::sqrt(dt));
    for (double& s : path.samples)
        s = normal(rng);
    return path;
}

std::uint64_t path_seed(std::uint64_t master_seed, std::uint64_t index)
{
    // splitmix64 of a counter offset by the master seed
    std::uint64_t z = master_seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

void check_alignment(const NoisePath& path, const StageSolution& base)
{
    if (base.kind != StageKind::InvertedHarmonic)
        throw AlignmentError("perturbation: base stage must be inverted-harmonic");
    const double span = base.duration();
    if (std::abs(path.duration() - span) > 1e-9 * span)
        throw AlignmentError("perturbation: noise grid covers " + std::to_string(path.duration()) +
                             " s but the stage lasts " + std::to_string(span) + " s");
}

} // namespace

PerArm<Perturbation> integrate_perturbation(const NoisePath& path, const StageSolution& base,
                                            const DerivedParams& p)
{
    check_alignment(path, base);
    const std::size_t n = path.samples.size();
    const double dt = path.dt;
    const double kappa = 2.0 * p.diamagnetic() * p.config.b0i;

    PerArm<Perturbation> out;
    for (Arm a : kArms) {
        const ArmMotion& m = base.motion[a];
        const double w2 = m.omega * m.omega;
        Perturbation& q = out[a];
        q.dt = dt;
        q.dx.assign(n + 1, 0.0);
        q.dv.assign(n + 1, 0.0);
        double x = 0, v = 0;
        double x_base = m.position(0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const double eta = path.samples[k];
            const double acc = 2.0 * x_base * kappa * eta + w2 * x;
            const double x_next = x + v * dt + 0.5 * acc * dt * dt;
            const double x_base_next = m.position(static_cast<double>(k + 1) * dt);
            const double acc_next = 2.0 * x_base_next * kappa * eta + w2 * x_next;
            v += 0.5 * (acc + acc_next) * dt;
            x = x_next;
            x_base = x_base_next;
            q.dx[k + 1] = x;
            q.dv[k + 1] = v;
        }
    }
    return out;
}

PhaseSample accumulate_phase(const NoisePath& path, const StageSolution& base,
                             const PerArm<Perturbation>& pert, const DerivedParams& p)
{
    check_alignment(path, base);
    const std::size_t n = path.samples.size();
    for (Arm a : kArms)
        if (pert[a].dx.size() != n + 1 || pert[a].dv.size() != n + 1 || pert[a].dt != path.dt)
            throw AlignmentError("phase: perturbation grid does not match the noise grid");

    const double dt = path.dt;
    const double m = p.config.mass;
    const double hbar = p.constants.hbar;
    const double kappa = 2.0 * p.diamagnetic() * p.config.b0i;
    const ArmMotion& mr = base.motion.right;
    const ArmMotion& ml = base.motion.left;
    const double w2 = mr.omega * mr.omega;

    auto la = [&](std::size_t k, double tau) {
        return mr.velocity(tau) * pert.right.dv[k] - ml.velocity(tau) * pert.left.dv[k];
    };
    auto lb = [&](std::size_t k, double tau) {
        return mr.position(tau) * pert.right.dx[k] - ml.position(tau) * pert.left.dx[k];
    };
    auto sq_diff = [&](double tau) {
        const double xr = mr.position(tau);
        const double xl = ml.position(tau);
        return (xr - xl) * (xr + xl);
    };

    double sa = 0, sb = 0, sc = 0;
    double prev_a = la(0, 0.0), prev_b = lb(0, 0.0), prev_sq = sq_diff(0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double tau = static_cast<double>(k + 1) * dt;
        const double cur_a = la(k + 1, tau);
        const double cur_b = lb(k + 1, tau);
        const double cur_sq = sq_diff(tau);
        sa += 0.5 * (prev_a + cur_a);
        sb += 0.5 * (prev_b + cur_b);
        sc += path.samples[k] * 0.5 * (prev_sq + cur_sq);
        prev_a = cur_a;
        prev_b = cur_b;
        prev_sq = cur_sq;
    }

    PhaseSample s;
    s.a = m / hbar * sa * dt;
    s.b = -m * w2 / hbar * sb * dt;
    s.c = -0.5 * m * kappa / hbar * sc * dt;
    s.total = s.a + s.b + s.c;
    s.seed = path.seed;
    return s;
}

GammaEstimate estimate_gamma(const std::vector<double>& phases, double tau)
{
    if (phases.size() < 100)
        throw ConfigError("estimate_gamma: need at least 100 paths, got " + std::to_string(phases.size()));
    if (!(tau > 0))
        throw ConfigError("estimate_gamma: tau must be > 0");

    const std::size_t n = phases.size();
    const double dn = static_cast<double>(n);
    double mean = 0;
    for (double x : phases)
        mean += x;
    mean /= dn;
    double s1 = 0, s2 = 0;
    for (double x : phases) {
        const double d = x - mean;
        s1 += d;
        s2 += d * d;
    }
    const double var = (s2 - s1 * s1 / dn) / (dn - 1.0);

    // delete-one jackknife of the sample variance
    const double m1 = dn - 1.0;
    double jmean = 0;
    std::vector<double> jk(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = phases[i] - mean;
        const double t1 = s1 - d;
        const double t2 = s2 - d * d;
        jk[i] = (t2 - t1 * t1 / m1) / (m1 - 1.0);
        jmean += jk[i];
    }
    jmean /= dn;
    double acc = 0;
    for (double v : jk)
        acc += (v - jmean) * (v - jmean);
    const double se = std::sqrt((dn - 1.0) / dn * acc);

    GammaEstimate g;
    g.mean_phase = mean;
    g.variance_rate = std::max(var, 0.0) / tau;
    g.standard_error = se / tau;
    g.n_paths = n;
    return g;
}

ComponentEstimates estimate_components(const std::vector<PhaseSample>& samples, double tau)
{
    std::vector<double> a, b, c, t;
    a.reserve(samples.size());
    b.reserve(samples.size());
    c.reserve(samples.size());
    t.reserve(samples.size());
    for (const PhaseSample& s : samples) {
        a.push_back(s.a);
        b.push_back(s.b);
        c.push_back(s.c);
        t.push_back(s.total);
    }
    return {estimate_gamma(a, tau), estimate_gamma(b, tau), estimate_gamma(c, tau), estimate_gamma(t, tau)};
}

EnsembleResult run_ensemble(const DerivedParams& p, const StageSolution& stage, const EnsembleOptions& opts)
{
    if (opts.steps < 1)
        throw ConfigError("mc.steps: must be >= 1");
    if (opts.n_paths < 100)
        throw ConfigError("mc.paths: must be >= 100");

    EnsembleResult r;
    r.tau = stage.duration();
    r.dt = r.tau / static_cast<double>(opts.steps);
    const double dt_max = 2.0 * pi / stage.motion.right.omega / 50.0;
    if (r.dt > dt_max * (1.0 + 1e-12))
        throw ResolutionError("mc.steps: " + std::to_string(opts.steps) + " steps give dt = " +
                              std::to_string(r.dt) + " s, above (2 pi/omega)/50 = " + std::to_string(dt_max) + " s");
    r.samples.resize(opts.n_paths);

    unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, opts.n_paths));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < opts.n_paths; i = next++) {
            const NoisePath path =
                generate_white_path(opts.amplitude, r.dt, r.tau, path_seed(opts.master_seed, i), stage.motion.right.omega);
            const auto pert = integrate_perturbation(path, stage, p);
            r.samples[i] = accumulate_phase(path, stage, pert, p);
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
    }
    r.estimates = estimate_components(r.samples, r.tau);
    return r;
}

PsdEstimate psd_estimate(const NoisePath& path, std::size_t segment_length)
{
    const std::size_t n = path.samples.size();
    if (n < 1024)
        throw ConfigError("psd_estimate: need at least 1024 samples, got " + std::to_string(n));
    const std::size_t len = std::min(segment_length, n);
    if (len < 16)
        throw ConfigError("psd_estimate: segment length must be >= 16");

    std::vector<double> window(len);
    double wsum2 = 0;
    for (std::size_t i = 0; i < len; ++i) {
        window[i] = 0.5 - 0.5 * std::cos(2.0 * pi * static_cast<double>(i) / static_cast<double>(len));
        wsum2 += window[i] * window[i];
    }

    const std::size_t bins = len / 2 + 1;
    double* in = fftw_alloc_real(len);
    fftw_complex* out = fftw_alloc_complex(bins);
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(len), in, out, FFTW_ESTIMATE);

    PsdEstimate est;
    est.segment_length = len;
    est.psd.assign(bins, 0.0);
    const std::size_t hop = len / 2;
    for (std::size_t start = 0; start + len <= n; start += hop) {
        for (std::size_t i = 0; i < len; ++i)
            in[i] = path.samples[start + i] * window[i];
        fftw_execute(plan);
        for (std::size_t k = 0; k < bins; ++k)
            est.psd[k] += out[k][0] * out[k][0] + out[k][1] * out[k][1];
        ++est.segments;
    }
    fftw_destroy_plan(plan);
    fftw_free(out);
    fftw_free(in);

    const double norm = path.dt / (wsum2 * static_cast<double>(est.segments));
    est.omega.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        est.psd[k] *= norm;
        est.omega[k] = 2.0 * pi * static_cast<double>(k) / (static_cast<double>(len) * path.dt);
    }
    return est;
}

} // namespace sgsim
