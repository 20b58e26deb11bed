#include "sgsim/wavepacket.hpp"

#include <cmath>
#include <numbers>

#include "sgsim/errors.hpp"

namespace sgsim {

namespace {

void check_width_args(double sigma0, double t, double mass)
{
    if (!(sigma0 > 0))
        throw ConfigError("sigma0 must be > 0");
    if (!(t >= 0))
        throw ConfigError("t must be >= 0");
    if (!(mass > 0))
        throw ConfigError("mass must be > 0");
}

} // namespace

double ground_state_width(double mass, double omega, const PhysicalConstants& c)
{
    if (!(mass > 0) || !(omega > 0))
        throw ConfigError("ground_state_width: mass and omega must be > 0");
    return std::sqrt(c.hbar / (2.0 * mass * omega));
}

double sigma_free(double sigma0, double t, double mass, const PhysicalConstants& c)
{
    check_width_args(sigma0, t, mass);
    const double r = c.hbar * t / (2.0 * mass * sigma0 * sigma0);
    return sigma0 * std::sqrt(1.0 + r * r);
}

double sigma_harmonic(double sigma0, double t, double mass, double omega, const PhysicalConstants& c)
{
    check_width_args(sigma0, t, mass);
    if (!(omega > 0))
        throw ConfigError("omega must be > 0");
    const double r = c.hbar / (2.0 * mass * omega * sigma0 * sigma0);
    const double s = std::sin(omega * t);
    const double co = std::cos(omega * t);
    return sigma0 * std::sqrt(r * r * s * s + co * co);
}

double sigma_inverted(double sigma0, double t, double mass, double omega, const PhysicalConstants& c)
{
    check_width_args(sigma0, t, mass);
    if (!(omega > 0))
        throw ConfigError("omega must be > 0");
    const double r = c.hbar / (2.0 * mass * omega * sigma0 * sigma0);
    const double s = std::sinh(omega * t);
    const double ch = std::cosh(omega * t);
    return sigma0 * std::sqrt(r * r * s * s + ch * ch);
}

double contrast(double delta_x, double delta_p, double sigma_x, double sigma_p)
{
    if (!(sigma_x > 0) || !(sigma_p > 0))
        throw ConfigError("contrast: widths must be > 0");
    const double u = delta_x / sigma_x;
    const double w = delta_p / sigma_p;
    return std::exp(-0.5 * (u * u + w * w));
}

WidthChain width_chain(const TrajectoryResult& traj)
{
    const DerivedParams& p = traj.params;
    const PhysicalConstants& c = p.constants;
    WidthChain w;
    w.sigma01 = ground_state_width(p.config.mass, p.omega1, c);
    double sigma = w.sigma01;
    w.sigma_at_boundary[0] = sigma;
    for (int i = 0; i < 5; ++i) {
        const StageSolution& s = traj.stages[i];
        if (s.kind == StageKind::InvertedHarmonic)
            sigma = sigma_inverted(sigma, s.duration(), p.config.mass, s.motion.right.omega, c);
        w.sigma_at_boundary[i + 1] = sigma;
    }
    w.sigma05 = sigma;
    w.amplification = sigma / w.sigma01;
    w.sigma_p_floor = c.hbar / (2.0 * sigma);
    return w;
}

ClosureContrast closure_contrast(const TrajectoryResult& traj, const WidthChain& chain)
{
    ClosureContrast cc;
    cc.delta_x = std::abs(traj.closure_position_residual);
    cc.delta_p = traj.params.config.mass * std::abs(traj.closure_velocity_right - traj.closure_velocity_left);
    cc.packet = {chain.sigma05, chain.sigma_p_floor, traj.total_duration};
    cc.value = contrast(cc.delta_x, cc.delta_p, chain.sigma05, chain.sigma_p_floor);
    return cc;
}

std::vector<WidthCurvePoint> width_curve(double sigma0, double omega, double mass, double t_end,
                                         std::size_t points, const PhysicalConstants& c)
{
    if (points < 2 || !(t_end > 0))
        throw ConfigError("width_curve: need >= 2 points and t_end > 0");
    std::vector<WidthCurvePoint> out;
    out.reserve(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double t = t_end * static_cast<double>(i) / static_cast<double>(points - 1);
        out.push_back({t, sigma_inverted(sigma0, t, mass, omega, c), sigma_free(sigma0, t, mass, c)});
    }
    return out;
}

FeasibilityReport feasibility_estimates(double mass, double bias_field, double transverse_gradient,
                                        const PhysicalConstants& c)
{
    if (!(bias_field >= 0))
        throw ConfigError("feasibility: bias field must be >= 0");
    if (!(transverse_gradient > 0))
        throw ConfigError("feasibility: transverse gradient must be > 0");
    FeasibilityReport f;
    f.bias_field = bias_field;
    f.transverse_gradient = transverse_gradient;
    f.larmor_hz = c.gamma_e * bias_field / (2.0 * std::numbers::pi);
    f.omega_y = harmonic_frequency(transverse_gradient, c);
    f.delta_y = ground_state_width(mass, f.omega_y, c);
    f.max_transverse_field = transverse_gradient * f.delta_y;
    f.bias_dominates = bias_field > 0 && bias_field >= 100.0 * f.max_transverse_field;
    return f;
}

} // namespace sgsim
