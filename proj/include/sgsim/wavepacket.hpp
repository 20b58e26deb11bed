#pragma once

#include <array>
#include <vector>

#include "sgsim/core_model.hpp"
#include "sgsim/trajectory.hpp"

namespace sgsim {

struct WavepacketState {
    double sigma_x = 0; // m
    double sigma_p = 0; // kg m/s, Heisenberg floor
    double t = 0;       // s
};

/// Minimum-uncertainty width sqrt(hbar / (2 m omega)).
double ground_state_width(double mass, double omega, const PhysicalConstants& c = kNanodiamond);

double sigma_free(double sigma0, double t, double mass, const PhysicalConstants& c = kNanodiamond);
double sigma_harmonic(double sigma0, double t, double mass, double omega,
                      const PhysicalConstants& c = kNanodiamond);
double sigma_inverted(double sigma0, double t, double mass, double omega,
                      const PhysicalConstants& c = kNanodiamond);

/// exp(-1/2 [(dx/sx)^2 + (dp/sp)^2]).
double contrast(double delta_x, double delta_p, double sigma_x, double sigma_p);

/// Width carried through the protocol. Inverted stages restart a
/// minimum-uncertainty evolution from the accumulated width; harmonic
/// stages keep the width unchanged.
struct WidthChain {
    double sigma01 = 0;
    std::array<double, 6> sigma_at_boundary{}; ///< T0..T5
    double sigma05 = 0;
    double amplification = 0;  ///< sigma05 / sigma01
    double sigma_p_floor = 0;  ///< hbar / (2 sigma05)
    bool harmonic_stages_approximated = true;
};

WidthChain width_chain(const TrajectoryResult& traj);

struct ClosureContrast {
    double delta_x = 0;
    double delta_p = 0;
    WavepacketState packet;
    double value = 1;
};

ClosureContrast closure_contrast(const TrajectoryResult& traj, const WidthChain& chain);

struct WidthCurvePoint {
    double t;
    double sigma_inverted;
    double sigma_free;
};

/// Inverted-harmonic vs free spreading of a packet of initial width sigma0.
std::vector<WidthCurvePoint> width_curve(double sigma0, double omega, double mass, double t_end,
                                         std::size_t points, const PhysicalConstants& c = kNanodiamond);

struct FeasibilityReport {
    double bias_field = 0;           // T
    double larmor_hz = 0;            // gamma_e B0 / 2 pi
    double transverse_gradient = 0;  // T/m
    double omega_y = 0;              // rad/s
    double delta_y = 0;              // m
    double max_transverse_field = 0; // T
    bool bias_dominates = false;     ///< B0 >= 100 x transverse field
};

FeasibilityReport feasibility_estimates(double mass, double bias_field, double transverse_gradient = 3e4,
                                        const PhysicalConstants& c = kNanodiamond);

} // namespace sgsim
