#pragma once

#include <numbers>
#include <string_view>

namespace sgsim {

/// SI constants for an NV-centre nanodiamond. Fixed data; tests may build
/// their own instance to probe error paths.
struct PhysicalConstants {
    double hbar = 1.05e-34;                     // J s
    double mu0 = 4e-7 * std::numbers::pi;       // H/m
    double gamma_e = 1.761e11;                  // s^-1 T^-1
    double chi_rho = -6.286e-9;                 // m^3/kg, diamagnetic
    double zero_field_splitting_D = 2.87e9;     // Hz; does not enter arm-difference dynamics
};

inline constexpr PhysicalConstants kNanodiamond{};

/// Lower critical field of niobium; every field along a trajectory must stay below it.
inline constexpr double kNiobiumHc1 = 0.135; // T

enum class ModelVariant {
    ModelI,  ///< stage 1 ends at zero velocity (maximum separation)
    ModelII, ///< stage 1 ends at maximum velocity
};

std::string_view to_string(ModelVariant m);
ModelVariant model_from_string(std::string_view s);

enum class Arm { Right, Left };

/// S_x eigenvalue carried by an arm in the spin-dependent stages.
constexpr double spin_of(Arm a) { return a == Arm::Right ? 1.0 : -1.0; }

template <class T>
struct PerArm {
    T right{};
    T left{};

    T& operator[](Arm a) { return a == Arm::Right ? right : left; }
    const T& operator[](Arm a) const { return a == Arm::Right ? right : left; }
};

inline constexpr Arm kArms[] = {Arm::Right, Arm::Left};

struct ProtocolConfig {
    double mass = 1e-15;          // kg
    double eta_hp = 5e3;          // T/m, stages 1, 3, 5
    double eta_ihp = 1e6;         // T/m^2, stages 2, 4
    double b0h = 1e-3;            // T, bias in HP stages
    double b0i = 0.1;             // T, bias in IHP stages
    double ihp_stage_phase = 1.5 * std::numbers::pi; // omega2 * (T2 - T1)
    ModelVariant model = ModelVariant::ModelII;

    /// Parameter set used for the dephasing numbers and Fig. 2.
    static ProtocolConfig table1() { return {}; }

    /// Throws ConfigError naming the first offending field.
    void validate() const;
};

struct DerivedParams {
    ProtocolConfig config;
    PhysicalConstants constants;

    double omega1 = 0, omega2 = 0, omega3 = 0, omega4 = 0, omega5 = 0; // rad/s
    PerArm<double> force_coeff; ///< C_j = S_xj hbar gamma_e - chi m B0H / mu0
    PerArm<double> n1;          ///< C_j eta1 / (m omega1^2), stage-1 amplitude
    PerArm<double> alpha;       ///< 8 B0I C_j / (m eta1)
    double lambda = 0;          ///< eta1^2 / (2 B0I eta2)
    double beta = 0;            ///< B0I B0H gamma_e
    double h_coeff = 0;         ///< -4 gamma_e B0H eta1 chi / mu0

    /// -chi_rho / mu0, the diamagnetic coupling shared by every frequency.
    double diamagnetic() const { return -constants.chi_rho / constants.mu0; }
};

DerivedParams derive_params(const ProtocolConfig& config,
                            const PhysicalConstants& constants = kNanodiamond);

/// Harmonic trap frequency sqrt(-chi/mu0) * eta for a linear gradient eta.
double harmonic_frequency(double eta, const PhysicalConstants& constants = kNanodiamond);

/// Inverted-trap rate sqrt(-2 chi/mu0 * eta_curv * b0) for a field B0 - eta_curv x^2.
double inverted_frequency(double eta_curv, double b0,
                          const PhysicalConstants& constants = kNanodiamond);

} // namespace sgsim
