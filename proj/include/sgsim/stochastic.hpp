#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sgsim/core_model.hpp"
#include "sgsim/trajectory.hpp"

namespace sgsim {

/// Band-limited white noise on a uniform grid: independent N(0, A^2/dt) draws,
/// held constant over each step.
struct NoisePath {
    double dt = 0;
    double amplitude = 0;
    std::uint64_t seed = 0;
    std::vector<double> samples;

    double duration() const { return dt * static_cast<double>(samples.size()); }
};

/// Throws ResolutionError if dt > (2 pi / fastest_omega) / 50.
NoisePath generate_white_path(double amplitude, double dt, double duration, std::uint64_t seed,
                              double fastest_omega);

/// Per-path seed from a master seed; independent of evaluation order.
std::uint64_t path_seed(std::uint64_t master_seed, std::uint64_t index);

/// Linearised response on the noise grid (nodes 0..n).
struct Perturbation {
    double dt = 0;
    std::vector<double> dx;
    std::vector<double> dv;
};

/// Velocity-Verlet integration of
///   d2(dx_j)/dt2 = 2 x_j(t) d(omega^2) + omega^2 dx_j,  d(omega^2) = -2 chi/mu0 B0I d(eta)
/// over an inverted-harmonic stage, from dx = dv = 0.
PerArm<Perturbation> integrate_perturbation(const NoisePath& path, const StageSolution& base,
                                            const DerivedParams& p);

struct PhaseSample {
    double a = 0; ///< velocity term
    double b = 0; ///< trajectory term
    double c = 0; ///< direct curvature term
    double total = 0;
    std::uint64_t seed = 0;
};

/// Trapezoidal accumulation of the three perturbed-Lagrangian terms.
PhaseSample accumulate_phase(const NoisePath& path, const StageSolution& base,
                             const PerArm<Perturbation>& pert, const DerivedParams& p);

struct GammaEstimate {
    double mean_phase = 0;
    double variance_rate = 0;  ///< Hz
    double standard_error = 0; ///< Hz, delete-one jackknife
    std::size_t n_paths = 0;
};

/// variance / tau with a jackknife standard error; needs at least 100 samples.
GammaEstimate estimate_gamma(const std::vector<double>& phases, double tau);

struct ComponentEstimates {
    GammaEstimate a, b, c, total;
};

ComponentEstimates estimate_components(const std::vector<PhaseSample>& samples, double tau);

struct EnsembleOptions {
    std::size_t n_paths = 10000;
    std::uint64_t master_seed = 1;
    std::size_t steps = 2000; ///< noise steps across the stage
    double amplitude = 0;     ///< A_IHP, T m^-2 Hz^-1/2
    unsigned threads = 0;     ///< 0: hardware concurrency
};

struct EnsembleResult {
    std::vector<PhaseSample> samples; ///< indexed by path
    ComponentEstimates estimates;
    double tau = 0;
    double dt = 0;
};

EnsembleResult run_ensemble(const DerivedParams& p, const StageSolution& stage,
                            const EnsembleOptions& opts);

struct PsdEstimate {
    std::vector<double> omega; ///< rad/s
    std::vector<double> psd;   ///< same units as A^2
    std::size_t segments = 0;
    std::size_t segment_length = 0;
};

/// Welch estimate (Hann window, half overlap). Normalised so that a path from
/// generate_white_path gives A^2 on average. Needs at least 1024 samples.
PsdEstimate psd_estimate(const NoisePath& path, std::size_t segment_length = 1024);

} // namespace sgsim
