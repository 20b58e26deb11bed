#include "sgsim/core_model.hpp"

#include <cmath>
#include <string>

#include "sgsim/errors.hpp"

namespace sgsim {

std::string_view to_string(ModelVariant m)
{
    return m == ModelVariant::ModelI ? "I" : "II";
}

ModelVariant model_from_string(std::string_view s)
{
    if (s == "I" || s == "ModelI" || s == "1")
        return ModelVariant::ModelI;
    if (s == "II" || s == "ModelII" || s == "2")
        return ModelVariant::ModelII;
    throw ConfigError("model: expected \"I\" or \"II\", got \"" + std::string(s) + "\"");
}

namespace {

void require(bool ok, const char* field, const char* what, double value)
{
    if (!ok)
        throw ConfigError(std::string(field) + ": " + what + " (got " + std::to_string(value) + ")");
}

} // namespace

void ProtocolConfig::validate() const
{
    require(std::isfinite(mass) && mass > 0, "mass_kg", "must be > 0", mass);
    require(std::isfinite(eta_hp) && eta_hp > 0, "eta_hp_T_per_m", "must be > 0", eta_hp);
    require(std::isfinite(eta_ihp) && eta_ihp > 0, "eta_ihp_T_per_m2", "must be > 0", eta_ihp);
    require(std::isfinite(b0i) && b0i > 0, "b0i_T", "must be > 0", b0i);
    require(std::isfinite(b0h) && b0h >= 0, "b0h_T", "must be >= 0", b0h);
    require(std::isfinite(ihp_stage_phase) && ihp_stage_phase > 0, "ihp_stage_phase_rad",
            "must be > 0", ihp_stage_phase);
}

double harmonic_frequency(double eta, const PhysicalConstants& c)
{
    const double k = -c.chi_rho / c.mu0;
    if (!(k > 0))
        throw InvalidMaterial("chi_rho must be negative (diamagnetic) for a real trap frequency");
    return std::sqrt(k) * eta;
}

double inverted_frequency(double eta_curv, double b0, const PhysicalConstants& c)
{
    const double radicand = -2.0 * c.chi_rho / c.mu0 * eta_curv * b0;
    if (!(radicand > 0))
        throw InvalidMaterial("inverted-trap radicand -2 chi/mu0 eta B0I is not positive");
    return std::sqrt(radicand);
}

DerivedParams derive_params(const ProtocolConfig& config, const PhysicalConstants& constants)
{
    config.validate();

    DerivedParams p;
    p.config = config;
    p.constants = constants;

    p.omega1 = harmonic_frequency(config.eta_hp, constants);
    p.omega3 = p.omega1;
    p.omega5 = p.omega1;
    p.omega2 = inverted_frequency(config.eta_ihp, config.b0i, constants);
    p.omega4 = p.omega2;

    const double dia_bias = constants.chi_rho * config.mass / constants.mu0 * config.b0h;
    for (Arm arm : kArms) {
        const double c = spin_of(arm) * constants.hbar * constants.gamma_e - dia_bias;
        p.force_coeff[arm] = c;
        p.n1[arm] = c * config.eta_hp / (config.mass * p.omega1 * p.omega1);
        p.alpha[arm] = 8.0 * config.b0i * c / (config.mass * config.eta_hp);
    }

    p.lambda = config.eta_hp * config.eta_hp / (2.0 * config.b0i * config.eta_ihp);
    p.beta = config.b0i * config.b0h * constants.gamma_e;
    p.h_coeff = -4.0 * constants.gamma_e * config.b0h * config.eta_hp * constants.chi_rho / constants.mu0;
    return p;
}

} // namespace sgsim
