#pragma once

// Test-only reference computations. None of these call the closed forms they check.

#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sgsim/core_model.hpp"
#include "sgsim/noise_spectral.hpp"

namespace oracle {

using std::numbers::pi;

// Values evaluated independently at 40 digits (mpmath) for the default parameter set.
namespace frozen {
inline constexpr double omega1 = 353.63257278488468;
inline constexpr double omega2 = 31.62985887220577;
inline constexpr double n1_spin = 7.3928881910533976e-10;
inline constexpr double delta_x_max_b0h0 = 1.006327900186724e-6;
inline constexpr double delta_x_max_approx = 1.0063947027031535e-6;
inline constexpr double t_star = 0.00025228816869824746;
inline constexpr double total_duration_model2 = 0.30735926668632494;
inline constexpr double gamma_a = 2.1468348051852149e+23;
inline constexpr double gamma_b = 1.0018196827546891e+24;
inline constexpr double gamma_c = 1.3165271501688139e+21;
inline constexpr double h_coeff = 17617888791.774268;
inline constexpr double gamma_hp = 136487417293077.07;
inline constexpr double baseline_eta0 = 14.785776382106795;
inline constexpr double sigma01 = 1.2184382420754701e-11;
inline constexpr double delta_y = 4.9742532936310518e-12;
inline constexpr double transverse_field = 1.4922759880893155e-7;
// int_0^inf of the dimensionless TF integrands (omega2 = 1), exact
inline constexpr double int_a = 0.04383688696568462;
inline constexpr double int_b = 0.087533462834442536;
inline constexpr double int_c = 0.39269917811112137475;
} // namespace frozen

/// Stage-2 argument u = omega2 t - phi2 runs over [0, phase]; integrand g(u) of each
/// phase term with its frequency-independent weight.
struct TimeIntegrand {
    double weight;       ///< multiplies |time integral|^2
    double c_pp, c_0, c_mm; ///< g(u) = c_pp e^{2u} + c_0 + c_mm e^{-2u}
};

inline TimeIntegrand time_integrand(sgsim::TransferTerm term, double omega, const sgsim::DerivedParams& p)
{
    const double w1 = p.omega1, w2 = p.omega2, lam = p.lambda, beta = p.beta;
    const double eta1 = p.config.eta_hp;
    const double r = std::sqrt(2.0 * p.config.b0i * p.config.eta_ihp);
    // (A cosh + B sinh)(C cosh + D sinh) = [(A+B)(C+D) e^{2u} + (A-B)(C-D) e^{-2u} + 2(AC - BD)] / 4
    auto prod = [](double A, double B, double C, double D) {
        return TimeIntegrand{0, (A + B) * (C + D) / 4.0, (A * C - B * D) / 2.0, (A - B) * (C - D) / 4.0};
    };
    const double d = w2 * w2 + omega * omega;
    TimeIntegrand t{};
    switch (term) {
    case sgsim::TransferTerm::A:
        t = prod(w1 / (eta1 * eta1), w2 / (eta1 * eta1), 1.0, lam);
        t.weight = 256.0 * beta * beta * omega * omega / (d * d);
        break;
    case sgsim::TransferTerm::B:
        t = prod(1.0 / (eta1 * eta1), 1.0 / (eta1 * r), 1.0, lam);
        t.weight = std::pow(32.0 * beta * w2 * w2, 2) / (4.0 * d * d);
        break;
    case sgsim::TransferTerm::C:
        t = prod(1.0 / eta1, 1.0 / r, 1.0 / eta1, 1.0 / r);
        t.weight = 16.0 * beta * beta;
        break;
    }
    return t;
}

/// weight * |int_{T1}^{T2} g(omega2 t - phi2) e^{i omega t} dt|^2 by adaptive quadrature.
inline double tf_time_integral(sgsim::TransferTerm term, double omega, const sgsim::DerivedParams& p)
{
    const TimeIntegrand ti = time_integrand(term, omega, p);
    const double w2 = p.omega2;
    const double span = p.config.ihp_stage_phase / w2;
    auto g = [&](double s) {
        const double u = w2 * s;
        return ti.c_pp * std::exp(2 * u) + ti.c_0 + ti.c_mm * std::exp(-2 * u);
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const int panels = 16 + static_cast<int>(omega * span / pi);
    double re = 0, im = 0;
    for (int k = 0; k < panels; ++k) {
        const double a = span * k / panels, b = span * (k + 1) / panels;
        re += GK::integrate([&](double s) { return g(s) * std::cos(omega * s); }, a, b, 3, 1e-12);
        im += GK::integrate([&](double s) { return g(s) * std::sin(omega * s); }, a, b, 3, 1e-12);
    }
    return ti.weight * (re * re + im * im);
}

/// Same quantity from the exact antiderivative of the exponentials.
inline double tf_time_integral_exact(sgsim::TransferTerm term, double omega, const sgsim::DerivedParams& p)
{
    const TimeIntegrand ti = time_integrand(term, omega, p);
    const double w2 = p.omega2;
    const double span = p.config.ihp_stage_phase / w2;
    using C = std::complex<double>;
    auto piece = [&](double coeff, double rate) {
        const C k(rate, omega);
        if (std::abs(k) == 0.0)
            return C(coeff * span, 0.0);
        return coeff * (std::exp(k * span) - 1.0) / k;
    };
    const C total = piece(ti.c_pp, 2 * w2) + piece(ti.c_0, 0.0) + piece(ti.c_mm, -2 * w2);
    return ti.weight * std::norm(total);
}

/// Phase-response kernels of the three stage-2 terms to a unit impulse of
/// delta eta at time s (continuous time, exact Green's function).
struct Kernel {
    double a, b, c;
};

inline Kernel phase_kernel(double s, const sgsim::DerivedParams& p, const sgsim::PerArm<double>& x0,
                           const sgsim::PerArm<double>& v0)
{
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double w = p.omega2;
    const double span = p.config.ihp_stage_phase / w;
    const double m = p.config.mass, hbar = p.constants.hbar;
    const double kappa = 2.0 * p.diamagnetic() * p.config.b0i;
    auto x = [&](sgsim::Arm a, double t) { return x0[a] * std::cosh(w * t) + v0[a] / w * std::sinh(w * t); };
    auto v = [&](sgsim::Arm a, double t) { return x0[a] * w * std::sinh(w * t) + v0[a] * std::cosh(w * t); };
    Kernel k{0, 0, 0};
    if (s < span) {
        for (sgsim::Arm a : sgsim::kArms) {
            const double sg = a == sgsim::Arm::Right ? 1.0 : -1.0;
            const double drive = 2.0 * kappa * x(a, s);
            const double ia = GK::integrate([&](double t) { return v(a, t) * drive * std::cosh(w * (t - s)); }, s,
                                            span, 2, 1e-11);
            const double ib = GK::integrate(
                [&](double t) { return x(a, t) * drive * std::sinh(w * (t - s)) / w; }, s, span, 2, 1e-11);
            k.a += sg * m / hbar * ia;
            k.b += -sg * m * w * w / hbar * ib;
        }
    }
    const double xr = x(sgsim::Arm::Right, s), xl = x(sgsim::Arm::Left, s);
    k.c = -0.5 * m * kappa / hbar * (xr - xl) * (xr + xl);
    return k;
}

struct KernelVariance {
    double a, b, c, total; ///< phase variance per unit A^2 (rad^2 / (T^2 m^-4 Hz^-1))
};

/// Var[delta phi] / A^2 = int K(s)^2 ds for white noise.
inline KernelVariance kernel_variance(const sgsim::DerivedParams& p, const sgsim::PerArm<double>& x0,
                                      const sgsim::PerArm<double>& v0, int panels = 24)
{
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double span = p.config.ihp_stage_phase / p.omega2;
    KernelVariance kv{0, 0, 0, 0};
    for (int i = 0; i < panels; ++i) {
        const double lo = span * i / panels, hi = span * (i + 1) / panels;
        kv.a += GK::integrate([&](double s) { auto k = phase_kernel(s, p, x0, v0); return k.a * k.a; }, lo, hi, 0);
        kv.b += GK::integrate([&](double s) { auto k = phase_kernel(s, p, x0, v0); return k.b * k.b; }, lo, hi, 0);
        kv.c += GK::integrate([&](double s) { auto k = phase_kernel(s, p, x0, v0); return k.c * k.c; }, lo, hi, 0);
        kv.total += GK::integrate(
            [&](double s) {
                auto k = phase_kernel(s, p, x0, v0);
                const double t = k.a + k.b + k.c;
                return t * t;
            },
            lo, hi, 0);
    }
    return kv;
}

/// Exact response to a constant delta eta = eps for base x = x0 cosh + (v0/w) sinh:
/// dx = (kappa eps / w) [t (x0 sinh + (v0/w) cosh) - (v0/w^2) sinh].
inline double constant_drive_dx(double t, double w, double kappa, double eps, double x0, double v0)
{
    const double b = v0 / w;
    return kappa * eps / w * (t * (x0 * std::sinh(w * t) + b * std::cosh(w * t)) - b / w * std::sinh(w * t));
}

} // namespace oracle
