#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "oracles.hpp"
#include "sgsim/errors.hpp"
#include "sgsim/noise_spectral.hpp"
#include "sgsim/stochastic.hpp"
#include "sgsim/trajectory.hpp"

using namespace sgsim;
using std::numbers::pi;

namespace {

const TrajectoryResult& table1_run()
{
    static const TrajectoryResult r = run_protocol(ProtocolConfig::table1());
    return r;
}

const StageSolution& stage2() { return table1_run().stages[1]; }
const DerivedParams& params() { return table1_run().params; }

NoisePath constant_path(double value, std::size_t steps)
{
    NoisePath path;
    path.dt = stage2().duration() / static_cast<double>(steps);
    path.amplitude = 0;
    path.samples.assign(steps, value);
    return path;
}

double kappa() { return 2.0 * params().diamagnetic() * params().config.b0i; }

} // namespace

TEST_SUITE("stochastic-mc")
{
    TEST_CASE("noise paths are reproducible from their seed")
    {
        const NoisePath a = generate_white_path(1.0, 1e-4, 0.1, 42, 31.6);
        const NoisePath b = generate_white_path(1.0, 1e-4, 0.1, 42, 31.6);
        const NoisePath c = generate_white_path(1.0, 1e-4, 0.1, 43, 31.6);
        CHECK(a.samples == b.samples);
        CHECK(a.samples != c.samples);
        CHECK(a.samples.size() == 1000);
        CHECK(path_seed(1, 0) == path_seed(1, 0));
        CHECK(path_seed(1, 0) != path_seed(1, 1));
        CHECK(path_seed(1, 5) != path_seed(2, 5));
    }

    TEST_CASE("noise samples have zero mean and variance A^2/dt")
    {
        const double amp = 3e-3, dt = 1e-4;
        const NoisePath p = generate_white_path(amp, dt, 20.0, 9, 31.6);
        const double n = static_cast<double>(p.samples.size());
        const double mean = std::accumulate(p.samples.begin(), p.samples.end(), 0.0) / n;
        double var = 0;
        for (double s : p.samples)
            var += (s - mean) * (s - mean);
        var /= n - 1;
        const double sd = amp / std::sqrt(dt);
        CHECK(std::abs(mean) < 5 * sd / std::sqrt(n));
        CHECK(var == doctest::Approx(sd * sd).epsilon(0.02));
        // lag-1 correlation vanishes on the grid
        double lag = 0;
        for (std::size_t i = 1; i < p.samples.size(); ++i)
            lag += p.samples[i] * p.samples[i - 1];
        lag /= (n - 1) * sd * sd;
        CHECK(std::abs(lag) < 5 / std::sqrt(n));
    }

    TEST_CASE("Welch estimate of a white path is flat at A^2")
    {
        const double amp = 2.0;
        const NoisePath p = generate_white_path(amp, 1e-4, 26.2144, 5, 31.6);
        const PsdEstimate e = psd_estimate(p, 1024);
        CHECK(e.segments > 500);
        CHECK(e.omega[1] == doctest::Approx(2 * pi / (1024 * 1e-4)));
        // 16-bin band averages
        for (std::size_t lo = 1; lo + 16 < e.psd.size(); lo += 16) {
            double band = 0;
            for (std::size_t k = lo; k < lo + 16; ++k)
                band += e.psd[k] / 16;
            CHECK(band == doctest::Approx(amp * amp).epsilon(0.10));
        }
        double all = 0;
        for (std::size_t k = 1; k + 1 < e.psd.size(); ++k)
            all += e.psd[k];
        CHECK(all / static_cast<double>(e.psd.size() - 2) == doctest::Approx(amp * amp).epsilon(0.02));
    }

    TEST_CASE("Welch estimate of degenerate paths")
    {
        const NoisePath zero = generate_white_path(0.0, 1e-4, 1.0, 1, 31.6);
        for (double v : psd_estimate(zero).psd)
            CHECK(v == 0);

        NoisePath tone = zero;
        const std::size_t bin = 100;
        const double w = 2 * pi * bin / (1024 * tone.dt);
        for (std::size_t i = 0; i < tone.samples.size(); ++i)
            tone.samples[i] = std::sin(w * tone.dt * static_cast<double>(i));
        const PsdEstimate e = psd_estimate(tone);
        const auto peak = std::max_element(e.psd.begin(), e.psd.end()) - e.psd.begin();
        CHECK(peak == static_cast<long>(bin));

        NoisePath shortp = zero;
        shortp.samples.resize(100);
        CHECK_THROWS_AS(psd_estimate(shortp), ConfigError);
    }

    TEST_CASE("constant drive matches the exact response")
    {
        const double eps = 1e-6;
        auto final_error = [&](std::size_t steps) {
            const NoisePath path = constant_path(eps, steps);
            const auto pert = integrate_perturbation(path, stage2(), params());
            double worst = 0;
            for (Arm a : kArms) {
                const double exact = oracle::constant_drive_dx(stage2().duration(), stage2().motion[a].omega, kappa(),
                                                               eps, stage2().entry[a].x, stage2().entry[a].v);
                worst = std::max(worst, std::abs(pert[a].dx.back() - exact) / std::abs(exact));
            }
            return worst;
        };
        const double e1 = final_error(20000);
        const double e2 = final_error(40000);
        CHECK(e1 < 1e-6);
        // second-order convergence
        CHECK(e1 / e2 == doctest::Approx(4).epsilon(0.1));
    }

    TEST_CASE("phase is linear in the noise")
    {
        const double tau = stage2().duration();
        const NoisePath full = generate_white_path(2e-6, tau / 2000, tau, 77, stage2().motion.right.omega);
        const NoisePath half = generate_white_path(1e-6, tau / 2000, tau, 77, stage2().motion.right.omega);
        const PhaseSample f = accumulate_phase(full, stage2(), integrate_perturbation(full, stage2(), params()), params());
        const PhaseSample h = accumulate_phase(half, stage2(), integrate_perturbation(half, stage2(), params()), params());
        CHECK(h.a == doctest::Approx(f.a / 2).epsilon(1e-8));
        CHECK(h.b == doctest::Approx(f.b / 2).epsilon(1e-8));
        CHECK(h.c == doctest::Approx(f.c / 2).epsilon(1e-8));
        CHECK(f.total == doctest::Approx(f.a + f.b + f.c).epsilon(1e-14));
        CHECK(f.seed == 77);
    }

    TEST_CASE("zero noise gives zero phase")
    {
        const NoisePath zero = constant_path(0.0, 2000);
        const PhaseSample s = accumulate_phase(zero, stage2(), integrate_perturbation(zero, stage2(), params()), params());
        CHECK(s.a == 0);
        CHECK(s.b == 0);
        CHECK(s.c == 0);
        CHECK(s.total == 0);
    }

    TEST_CASE("symmetric arms do not dephase")
    {
        ProtocolConfig c = ProtocolConfig::table1();
        c.b0h = 0;
        const TrajectoryResult r0 = run_protocol(c);
        const StageSolution& s0 = r0.stages[1];
        const double tau = s0.duration();
        const NoisePath path = generate_white_path(1e-6, tau / 2000, tau, 3, s0.motion.right.omega);
        const PhaseSample z = accumulate_phase(path, s0, integrate_perturbation(path, s0, r0.params), r0.params);
        const PhaseSample ref = accumulate_phase(path, stage2(), integrate_perturbation(path, stage2(), params()), params());
        CHECK(std::abs(z.a) <= 1e-12 * std::abs(ref.a));
        CHECK(std::abs(z.b) <= 1e-12 * std::abs(ref.b));
        CHECK(z.c == 0);
    }

    TEST_CASE("variance estimator and jackknife")
    {
        std::mt19937_64 rng(11);
        std::normal_distribution<double> g(0.0, 3.0);
        std::vector<double> small(2000), large(8000);
        for (double& x : small)
            x = g(rng);
        for (double& x : large)
            x = g(rng);
        const GammaEstimate s = estimate_gamma(small, 0.5);
        const GammaEstimate l = estimate_gamma(large, 0.5);
        CHECK(l.variance_rate == doctest::Approx(18).epsilon(0.05));
        CHECK(std::abs(s.variance_rate - 18) < 4 * s.standard_error);
        CHECK(s.standard_error == doctest::Approx(18 * std::sqrt(2.0 / 1999)).epsilon(0.15));
        CHECK(s.standard_error / l.standard_error == doctest::Approx(2).epsilon(0.15));
        CHECK(l.n_paths == 8000);
        CHECK(l.variance_rate >= 0);

        std::vector<double> few(99, 1.0);
        CHECK_THROWS_AS(estimate_gamma(few, 1.0), ConfigError);
        CHECK_THROWS_AS(estimate_gamma(large, 0.0), ConfigError);
        const GammaEstimate flat = estimate_gamma(std::vector<double>(100, 2.5), 1.0);
        CHECK(flat.variance_rate == 0);
        CHECK(flat.mean_phase == 2.5);
    }

    TEST_CASE("grid and resolution errors")
    {
        const double tau = stage2().duration();
        NoisePath wrong = constant_path(0.0, 2000);
        wrong.samples.pop_back();
        CHECK_THROWS_AS(integrate_perturbation(wrong, stage2(), params()), AlignmentError);
        CHECK_THROWS_AS(integrate_perturbation(constant_path(0.0, 2000), table1_run().stages[2], params()),
                        AlignmentError);
        const NoisePath ok = constant_path(0.0, 2000);
        auto pert = integrate_perturbation(ok, stage2(), params());
        pert.left.dx.pop_back();
        CHECK_THROWS_AS(accumulate_phase(ok, stage2(), pert, params()), AlignmentError);

        const double w = stage2().motion.right.omega;
        CHECK_THROWS_AS(generate_white_path(1.0, 2 * pi / w / 40, tau, 1, w), ResolutionError);
        CHECK_NOTHROW(generate_white_path(1.0, 2 * pi / w / 50, tau, 1, w));
        EnsembleOptions o;
        o.n_paths = 100;
        o.steps = 10;
        o.amplitude = 1e-6;
        CHECK_THROWS_AS(run_ensemble(params(), stage2(), o), ResolutionError);
        o.steps = 2000;
        o.n_paths = 50;
        CHECK_THROWS_AS(run_ensemble(params(), stage2(), o), ConfigError);
    }

    TEST_CASE("ensemble is independent of the thread count")
    {
        EnsembleOptions o;
        o.n_paths = 300;
        o.steps = 500;
        o.master_seed = 2024;
        o.amplitude = 1e-6;
        o.threads = 1;
        const EnsembleResult one = run_ensemble(params(), stage2(), o);
        o.threads = 4;
        const EnsembleResult four = run_ensemble(params(), stage2(), o);
        for (std::size_t i = 0; i < one.samples.size(); ++i) {
            CHECK(one.samples[i].total == four.samples[i].total);
            CHECK(one.samples[i].seed == four.samples[i].seed);
        }
        CHECK(one.estimates.total.variance_rate == four.estimates.total.variance_rate);
        CHECK(one.tau == doctest::Approx(stage2().duration()));
    }

    TEST_CASE("ensemble variance agrees with the response-kernel oracle")
    {
        const double amp = amplitude_from_tilde(params(), NoiseContext::IHPCurvature, 1e-14);
        EnsembleOptions o;
        o.n_paths = 4000;
        o.steps = 2000;
        o.master_seed = 99;
        o.amplitude = amp;
        const EnsembleResult r = run_ensemble(params(), stage2(), o);
        PerArm<double> x0{stage2().entry.right.x, stage2().entry.left.x};
        PerArm<double> v0{stage2().entry.right.v, stage2().entry.left.v};
        const oracle::KernelVariance kv = oracle::kernel_variance(params(), x0, v0);
        const double scale = amp * amp / r.tau;
        struct Row {
            std::string name;
            const GammaEstimate& mc;
            double expected;
        };
        for (const Row& row : {Row{"a", r.estimates.a, kv.a * scale}, Row{"b", r.estimates.b, kv.b * scale},
                               Row{"c", r.estimates.c, kv.c * scale}, Row{"total", r.estimates.total, kv.total * scale}}) {
            MESSAGE(row.name << ": MC " << row.mc.variance_rate << " +- " << row.mc.standard_error << ", kernel "
                             << row.expected);
            CHECK(std::abs(row.mc.variance_rate - row.expected) <= 3 * row.mc.standard_error);
            CHECK(std::abs(row.mc.mean_phase) <= 4 * std::sqrt(row.mc.variance_rate * r.tau / 4000.0));
        }
    }
}
