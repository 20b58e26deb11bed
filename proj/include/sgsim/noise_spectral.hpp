#pragma once

#include <string_view>

#include "sgsim/core_model.hpp"

namespace sgsim {

enum class NoiseKind { White };

/// Which field parameter the noise perturbs.
enum class NoiseContext {
    HPGradient,   ///< delta eta_1, T m^-1 Hz^-1/2
    IHPCurvature, ///< delta eta_2, T m^-2 Hz^-1/2
};

struct NoiseModel {
    NoiseKind kind = NoiseKind::White;
    double amplitude = 0; ///< A, sqrt of the flat PSD
    NoiseContext context = NoiseContext::IHPCurvature;

    double psd(double /*omega*/) const { return amplitude * amplitude; }
};

/// A_tilde = A sqrt(omega) / eta, per stage type.
double tilde_from_amplitude(const DerivedParams& p, NoiseContext ctx, double amplitude);
double amplitude_from_tilde(const DerivedParams& p, NoiseContext ctx, double tilde);
NoiseModel noise_from_tilde(const DerivedParams& p, NoiseContext ctx, double tilde);

enum class TransferTerm { A, B, C };
std::string_view to_string(TransferTerm t);

/// Stage-2 transfer functions, as closed forms.
double transfer_a(double omega, const DerivedParams& p);
double transfer_b(double omega, const DerivedParams& p);
double transfer_c(double omega, const DerivedParams& p);
double transfer(TransferTerm term, double omega, const DerivedParams& p);

/// Closed-form white-noise dephasing rate of one stage-2 term (Hz).
double gamma_closed_form(TransferTerm term, const NoiseModel& noise, const DerivedParams& p);

struct QuadratureOptions {
    double cut_factor = 1e3;       ///< Omega_cut = cut_factor * omega2
    double panel_width_factor = 4.0 / 3.0; ///< panel width in units of omega2
    double panel_tol = 1e-13;
};

struct GammaComponent {
    TransferTerm term = TransferTerm::A;
    double closed_form = 0;   ///< Hz
    double quadrature = 0;    ///< Hz, includes tail_estimate
    double tail_estimate = 0; ///< Hz, sin^2-averaged tail above Omega_cut
    double tail_bound = 0;    ///< Hz, envelope bound on the tail
    double quadrature_error = 0; ///< Hz, summed panel error estimates
    double omega_cut = 0;
};

/// Gamma = 2 * int_{omega_min}^inf F(omega) S(omega) domega, by panelled
/// Gauss-Kronrod plus an envelope tail, alongside the closed form.
GammaComponent gamma_component(TransferTerm term, const NoiseModel& noise, const DerivedParams& p,
                               double omega_min = 0.0, const QuadratureOptions& opts = {});

/// (sqrt a + sqrt b + sqrt c)^2.
double gamma_stage2(double gamma_a, double gamma_b, double gamma_c);

/// sqrt(Gamma_2^2 + Gamma_4^2) with Gamma_4 = Gamma_2.
double gamma_ihp_total(double gamma_stage2);

/// Full-loop harmonic bound 8 H^2 / omega1^5 * 4.3 * A^2.
double gamma_hp_total(const DerivedParams& p, const NoiseModel& noise_hp);

inline constexpr double kHarmonicLoopFactor = 4.3;

struct TotalDephasing {
    double gamma_total = 0; ///< Hz
    double coherence = 1;
};

TotalDephasing gamma_total_and_coherence(double gamma_ihp, double gamma_hp, double tau);

/// Largest Gamma with exp(-Gamma tau) >= floor.
double dephasing_budget(double coherence_floor, double tau);

struct NoiseBounds {
    double coherence_floor = 0;
    double tau = 0;
    double budget = 0;            ///< Hz
    double sqrt_coeff_ihp = 0;    ///< sqrt(Gamma_IHP) / A_tilde_IHP
    double sqrt_coeff_hp = 0;     ///< sqrt(Gamma_HP) / A_tilde_HP
    double tilde_ihp_alone = 0;   ///< with A_tilde_HP = 0
    double tilde_hp_alone = 0;    ///< with A_tilde_IHP = 0
    double hp_tilde_assumed = 0;
    double tilde_ihp = 0;         ///< given hp_tilde_assumed
    double amplitude_ihp = 0;     ///< T m^-2 Hz^-1/2
    double amplitude_hp_alone = 0; ///< T m^-1 Hz^-1/2
    double amplitude_hp_assumed = 0;
};

/// Inverts Gamma_tot <= -ln(floor)/tau. Throws BoundInfeasible if the assumed
/// HP noise alone exceeds the budget.
NoiseBounds solve_noise_bounds(const DerivedParams& p, double coherence_floor,
                               double hp_tilde_assumed = 1e-6, double tau = 0.31);

struct DephasingReport {
    // per unit A_tilde^2 (Hz)
    GammaComponent a, b, c;
    double gamma_stage2 = 0;
    double gamma_stage2_quadrature = 0;
    double gamma_ihp_total = 0;
    double gamma_hp_total = 0;
    double sqrt_coeff_ihp = 0;
    double sqrt_coeff_hp = 0;
    // per unit physical A^2 (Hz / (T^2 m^-4 Hz^-1) and Hz / (T^2 m^-2 Hz^-1))
    double gamma_stage2_per_amp2 = 0;
    double gamma_ihp_total_per_amp2 = 0;
    double gamma_hp_total_per_amp2 = 0;
    double h_coeff = 0;
    // for the supplied amplitudes
    NoiseModel noise_ihp;
    NoiseModel noise_hp;
    double gamma_ihp = 0;
    double gamma_hp = 0;
    TotalDephasing total;
    double tau = 0;
};

DephasingReport dephasing_report(const DerivedParams& p, const NoiseModel& noise_ihp,
                                 const NoiseModel& noise_hp, double tau,
                                 const QuadratureOptions& opts = {});

} // namespace sgsim
