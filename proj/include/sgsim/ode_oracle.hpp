#pragma once

#include <array>

#include "sgsim/core_model.hpp"
#include "sgsim/trajectory.hpp"

namespace sgsim {

/// One-arm dynamics inside a stage: xdd = k x + cubic x^3 + drive.
struct ArmDynamics {
    double k = 0;
    double cubic = 0;
    double drive = 0;

    double energy(double x, double v) const
    {
        return 0.5 * v * v - 0.5 * k * x * x - 0.25 * cubic * x * x * x * x - drive * x;
    }
};

struct IntegrationStats {
    long accepted = 0;
    long rejected = 0;
    double max_energy_drift = 0; ///< max |E - E0| / energy scale
};

/// Adaptive Dormand-Prince integration of one arm over [0, duration].
/// Throws StiffnessError if the step size underflows.
IntegrationStats integrate_arm(const ArmDynamics& dyn, double& x, double& v, double duration,
                               double rel_tol, double abs_tol);

/// Dynamics of an arm in a given stage.
ArmDynamics stage_dynamics(const DerivedParams& p, int stage_index, Arm arm, bool include_cubic);

struct OracleResult {
    std::array<StagePair, 6> boundaries; ///< T0..T5
    std::array<double, 5> durations{};
    std::array<IntegrationStats, 5> stats{};
    double t_star = 0;
    double delta_x_max = 0;
    double total_duration = 0;
    double closure_position_residual = 0;
    double closure_velocity_right = 0;
    double closure_velocity_left = 0;
};

/// Brute-force reference for run_protocol. Stage durations are recomputed
/// from the oracle's own states; tolerances must lie in (0, 1e-3].
OracleResult ode_oracle(const ProtocolConfig& config, bool include_cubic, double rel_tol,
                        double abs_tol, const PhysicalConstants& constants = kNanodiamond);

} // namespace sgsim
