#include "sgsim/noise_spectral.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sgsim/errors.hpp"

namespace sgsim {

using std::numbers::pi;

namespace {

double eta_of(const DerivedParams& p, NoiseContext ctx)
{
    return ctx == NoiseContext::HPGradient ? p.config.eta_hp : p.config.eta_ihp;
}

double omega_of(const DerivedParams& p, NoiseContext ctx)
{
    return ctx == NoiseContext::HPGradient ? p.omega1 : p.omega2;
}

void require_context(const NoiseModel& n, NoiseContext ctx, const char* who)
{
    if (n.kind != NoiseKind::White)
        throw ConfigError(std::string(who) + ": only white noise is supported");
    if (n.context != ctx)
        throw ConfigError(std::string(who) + ": noise context mismatch");
    if (!(n.amplitude >= 0) || !std::isfinite(n.amplitude))
        throw ConfigError(std::string(who) + ": amplitude must be finite and >= 0");
}

double e6pi() { return std::exp(6.0 * pi); }

// Frequency-independent prefactors of the three transfer functions.
double prefactor_a(const DerivedParams& p)
{
    const double eta1 = p.config.eta_hp;
    const double k = p.omega2 + p.omega1 * p.lambda + 2.0 * p.omega1;
    return 16.0 * p.beta * p.beta * e6pi() * k * k / (eta1 * eta1 * eta1 * eta1);
}

double b_bracket(const DerivedParams& p)
{
    const double eta1 = p.config.eta_hp;
    return 1.0 / (eta1 * eta1) + 1.0 / (eta1 * std::sqrt(2.0 * p.config.b0i * p.config.eta_ihp));
}

double prefactor_b(const DerivedParams& p)
{
    const double w2 = p.omega2;
    const double br = b_bracket(p);
    return 32.0 * p.beta * p.beta * w2 * w2 * w2 * w2 * e6pi() * (p.lambda + 1.0) * (p.lambda + 1.0) *
           br * br;
}

double c_bracket(const DerivedParams& p)
{
    const double eta1 = p.config.eta_hp;
    const double be = p.config.b0i * p.config.eta_ihp;
    return std::sqrt(2.0) / (eta1 * std::sqrt(be)) + 1.0 / (eta1 * eta1) + 1.0 / (2.0 * be);
}

double prefactor_c(const DerivedParams& p)
{
    const double br = c_bracket(p);
    return 2.0 * p.beta * p.beta * e6pi() * br * br;
}

} // namespace

double tilde_from_amplitude(const DerivedParams& p, NoiseContext ctx, double amplitude)
{
    return amplitude * std::sqrt(omega_of(p, ctx)) / eta_of(p, ctx);
}

double amplitude_from_tilde(const DerivedParams& p, NoiseContext ctx, double tilde)
{
    return tilde * eta_of(p, ctx) / std::sqrt(omega_of(p, ctx));
}

NoiseModel noise_from_tilde(const DerivedParams& p, NoiseContext ctx, double tilde)
{
    return {NoiseKind::White, amplitude_from_tilde(p, ctx, tilde), ctx};
}

std::string_view to_string(TransferTerm t)
{
    switch (t) {
    case TransferTerm::A: return "a";
    case TransferTerm::B: return "b";
    case TransferTerm::C: return "c";
    }
    return "?";
}

double transfer_a(double omega, const DerivedParams& p)
{
    const double w2 = p.omega2;
    const double s = 1.5 * pi * omega / w2;
    const double d1 = w2 * w2 + omega * omega;
    const double d2 = omega * omega + 4.0 * w2 * w2;
    const double osc = 2.0 * w2 * std::sin(s) - omega * std::cos(s);
    return prefactor_a(p) * omega * omega / (d1 * d1) / (d2 * d2) * osc * osc;
}

double transfer_b(double omega, const DerivedParams& p)
{
    const double w2 = p.omega2;
    const double s = 1.5 * pi * omega / w2;
    const double d1 = w2 * w2 + omega * omega;
    const double d2 = omega * omega + 4.0 * w2 * w2;
    const double osc = omega * std::sin(s) + 2.0 * w2 * std::cos(s);
    return prefactor_b(p) / (d1 * d1 * d2 * d2) * osc * osc;
}

double transfer_c(double omega, const DerivedParams& p)
{
    const double w2 = p.omega2;
    const double s = 1.5 * pi * omega / w2;
    const double d2 = omega * omega + 4.0 * w2 * w2;
    const double osc = omega * std::sin(s) + 2.0 * w2 * std::cos(s);
    return prefactor_c(p) / (d2 * d2) * osc * osc;
}

double transfer(TransferTerm term, double omega, const DerivedParams& p)
{
    switch (term) {
    case TransferTerm::A: return transfer_a(omega, p);
    case TransferTerm::B: return transfer_b(omega, p);
    case TransferTerm::C: return transfer_c(omega, p);
    }
    return 0.0;
}

double gamma_closed_form(TransferTerm term, const NoiseModel& noise, const DerivedParams& p)
{
    require_context(noise, NoiseContext::IHPCurvature, "gamma_closed_form");
    const double a2 = noise.amplitude * noise.amplitude;
    const double w2 = p.omega2;
    const double bb = p.beta * p.beta * e6pi();
    switch (term) {
    case TransferTerm::A: {
        const double eta1 = p.config.eta_hp;
        const double k = w2 + p.omega1 * p.lambda + 2.0 * p.omega1;
        return 4.0 * bb * k * k / (eta1 * eta1 * eta1 * eta1) * pi / (9.0 * w2 * w2 * w2) * a2;
    }
    case TransferTerm::B: {
        const double br = b_bracket(p);
        return 16.0 * bb * (p.lambda + 1.0) * (p.lambda + 1.0) * br * br * pi / (9.0 * w2) * a2;
    }
    case TransferTerm::C: {
        const double br = c_bracket(p);
        return bb * br * br * pi / (4.0 * w2) * a2;
    }
    }
    return 0.0;
}

GammaComponent gamma_component(TransferTerm term, const NoiseModel& noise, const DerivedParams& p,
                               double omega_min, const QuadratureOptions& opts)
{
    require_context(noise, NoiseContext::IHPCurvature, "gamma_component");
    if (!(omega_min >= 0))
        throw ConfigError("omega_min: must be >= 0");
    if (!(opts.cut_factor > 0) || !(opts.panel_width_factor > 0))
        throw ConfigError("quadrature options must be positive");

    GammaComponent g;
    g.term = term;
    g.closed_form = gamma_closed_form(term, noise, p);

    const double a2 = noise.amplitude * noise.amplitude;
    const double w2 = p.omega2;
    const double cut = std::max(opts.cut_factor * w2, omega_min);
    g.omega_cut = cut;

    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    auto f = [&](double w) { return transfer(term, w, p); };
    const double width = opts.panel_width_factor * w2;
    double sum = 0.0;
    double err = 0.0;
    for (double lo = omega_min; lo < cut;) {
        const double hi = std::min(lo + width, cut);
        double e = 0.0;
        sum += GK::integrate(f, lo, hi, 15, opts.panel_tol, &e);
        err += e;
        lo = hi;
    }
    if (!std::isfinite(sum) || err > 1e-8 * std::abs(sum) + 1e-300)
        throw IntegrationError("gamma_component(" + std::string(to_string(term)) +
                               "): quadrature did not converge, integral " + std::to_string(sum) +
                               ", error estimate " + std::to_string(err));

    // Envelope integrals of F above the cut; the oscillating factor averages to 1/2.
    double envelope = 0.0;
    switch (term) {
    case TransferTerm::A: envelope = prefactor_a(p) / (3.0 * cut * cut * cut); break;
    case TransferTerm::B: envelope = prefactor_b(p) / (5.0 * std::pow(cut, 5)); break;
    case TransferTerm::C:
        envelope = prefactor_c(p) * (pi / 2.0 - std::atan(cut / (2.0 * w2))) / (2.0 * w2);
        break;
    }
    g.tail_bound = 2.0 * a2 * envelope;
    g.tail_estimate = 0.5 * g.tail_bound;
    g.quadrature_error = 2.0 * a2 * err;
    g.quadrature = 2.0 * a2 * sum + g.tail_estimate;
    return g;
}

double gamma_stage2(double gamma_a, double gamma_b, double gamma_c)
{
    const double s = std::sqrt(gamma_a) + std::sqrt(gamma_b) + std::sqrt(gamma_c);
    return s * s;
}

double gamma_ihp_total(double gamma_stage2) { return std::sqrt(2.0) * gamma_stage2; }

double gamma_hp_total(const DerivedParams& p, const NoiseModel& noise_hp)
{
    require_context(noise_hp, NoiseContext::HPGradient, "gamma_hp_total");
    const double w = p.omega1;
    return 8.0 * p.h_coeff * p.h_coeff / std::pow(w, 5) * noise_hp.amplitude * noise_hp.amplitude *
           kHarmonicLoopFactor;
}

TotalDephasing gamma_total_and_coherence(double gamma_ihp, double gamma_hp, double tau)
{
    if (!(tau > 0))
        throw ConfigError("tau_s: must be > 0");
    if (!(gamma_ihp >= 0) || !(gamma_hp >= 0))
        throw ConfigError("dephasing rates must be >= 0");
    const double s = std::sqrt(gamma_ihp) + std::sqrt(gamma_hp);
    TotalDephasing t;
    t.gamma_total = s * s;
    t.coherence = std::exp(-t.gamma_total * tau);
    return t;
}

double dephasing_budget(double coherence_floor, double tau)
{
    if (!(coherence_floor > 0 && coherence_floor < 1))
        throw ConfigError("coherence_floor: must lie in (0, 1)");
    if (!(tau > 0))
        throw ConfigError("tau_s: must be > 0");
    return -std::log(coherence_floor) / tau;
}

NoiseBounds solve_noise_bounds(const DerivedParams& p, double coherence_floor,
                               double hp_tilde_assumed, double tau)
{
    if (!(hp_tilde_assumed >= 0))
        throw ConfigError("hp_tilde_assumed: must be >= 0");
    NoiseBounds b;
    b.coherence_floor = coherence_floor;
    b.tau = tau;
    b.hp_tilde_assumed = hp_tilde_assumed;
    b.budget = dephasing_budget(coherence_floor, tau);

    const NoiseModel unit_ihp = noise_from_tilde(p, NoiseContext::IHPCurvature, 1.0);
    const NoiseModel unit_hp = noise_from_tilde(p, NoiseContext::HPGradient, 1.0);
    const double g2 = gamma_stage2(gamma_closed_form(TransferTerm::A, unit_ihp, p),
                                   gamma_closed_form(TransferTerm::B, unit_ihp, p),
                                   gamma_closed_form(TransferTerm::C, unit_ihp, p));
    b.sqrt_coeff_ihp = std::sqrt(gamma_ihp_total(g2));
    b.sqrt_coeff_hp = std::sqrt(gamma_hp_total(p, unit_hp));

    const double root = std::sqrt(b.budget);
    b.tilde_ihp_alone = root / b.sqrt_coeff_ihp;
    b.tilde_hp_alone = b.sqrt_coeff_hp > 0 ? root / b.sqrt_coeff_hp : INFINITY;
    b.amplitude_hp_alone = amplitude_from_tilde(p, NoiseContext::HPGradient, b.tilde_hp_alone);
    b.amplitude_hp_assumed = amplitude_from_tilde(p, NoiseContext::HPGradient, hp_tilde_assumed);

    const double remaining = root - b.sqrt_coeff_hp * hp_tilde_assumed;
    if (remaining < 0)
        throw BoundInfeasible("noise budget infeasible: HP term sqrt(Gamma_HP) = " +
                              std::to_string(b.sqrt_coeff_hp * hp_tilde_assumed) +
                              " Hz^1/2 at A_tilde_HP = " + std::to_string(hp_tilde_assumed) +
                              " exceeds sqrt(budget) = " + std::to_string(root) + " Hz^1/2");
    b.tilde_ihp = remaining / b.sqrt_coeff_ihp;
    b.amplitude_ihp = amplitude_from_tilde(p, NoiseContext::IHPCurvature, b.tilde_ihp);
    return b;
}

DephasingReport dephasing_report(const DerivedParams& p, const NoiseModel& noise_ihp,
                                 const NoiseModel& noise_hp, double tau, const QuadratureOptions& opts)
{
    require_context(noise_ihp, NoiseContext::IHPCurvature, "dephasing_report");
    require_context(noise_hp, NoiseContext::HPGradient, "dephasing_report");

    DephasingReport r;
    const NoiseModel unit_ihp = noise_from_tilde(p, NoiseContext::IHPCurvature, 1.0);
    const NoiseModel unit_hp = noise_from_tilde(p, NoiseContext::HPGradient, 1.0);
    r.a = gamma_component(TransferTerm::A, unit_ihp, p, 0.0, opts);
    r.b = gamma_component(TransferTerm::B, unit_ihp, p, 0.0, opts);
    r.c = gamma_component(TransferTerm::C, unit_ihp, p, 0.0, opts);
    r.gamma_stage2 = gamma_stage2(r.a.closed_form, r.b.closed_form, r.c.closed_form);
    r.gamma_stage2_quadrature = gamma_stage2(r.a.quadrature, r.b.quadrature, r.c.quadrature);
    r.gamma_ihp_total = gamma_ihp_total(r.gamma_stage2);
    r.gamma_hp_total = gamma_hp_total(p, unit_hp);
    r.sqrt_coeff_ihp = std::sqrt(r.gamma_ihp_total);
    r.sqrt_coeff_hp = std::sqrt(r.gamma_hp_total);

    const double ui = unit_ihp.amplitude * unit_ihp.amplitude;
    const double uh = unit_hp.amplitude * unit_hp.amplitude;
    r.gamma_stage2_per_amp2 = r.gamma_stage2 / ui;
    r.gamma_ihp_total_per_amp2 = r.gamma_ihp_total / ui;
    r.gamma_hp_total_per_amp2 = r.gamma_hp_total / uh;
    r.h_coeff = p.h_coeff;

    r.noise_ihp = noise_ihp;
    r.noise_hp = noise_hp;
    r.tau = tau;
    r.gamma_ihp = r.gamma_ihp_total_per_amp2 * noise_ihp.amplitude * noise_ihp.amplitude;
    r.gamma_hp = r.gamma_hp_total_per_amp2 * noise_hp.amplitude * noise_hp.amplitude;
    r.total = gamma_total_and_coherence(r.gamma_ihp, r.gamma_hp, tau);
    return r;
}

} // namespace sgsim
