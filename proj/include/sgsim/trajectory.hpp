#pragma once

#include <array>
#include <vector>

#include "sgsim/core_model.hpp"

namespace sgsim {

enum class StageKind { Harmonic, InvertedHarmonic };

struct ArmState {
    double t = 0;
    double x = 0;
    double v = 0;
    Arm arm = Arm::Right;
};

/// Closed-form motion of one arm inside one stage, with tau = t - t_start.
///   Harmonic:          x = centre + amplitude * sin(omega tau + phase)
///   InvertedHarmonic:  x = x0 cosh(omega tau) + (v0/omega) sinh(omega tau)
struct ArmMotion {
    StageKind kind = StageKind::Harmonic;
    double omega = 0;
    double centre = 0;
    double x0 = 0;
    double v0 = 0;
    double amplitude = 0;
    double phase = 0;

    static ArmMotion harmonic(double omega, double centre, double x0, double v0);
    static ArmMotion inverted(double omega, double x0, double v0);

    double position(double tau) const;
    double velocity(double tau) const;
    double acceleration(double tau) const;
    /// Position from the amplitude/phase form only; used for the branch check.
    double compact_position(double tau) const;
};

struct StageSolution {
    int index = 0;
    StageKind kind = StageKind::Harmonic;
    double t_start = 0;
    double t_end = 0;
    double t_star = 0; ///< stage 3 only: time from T2 to the first extremum of x_R - x_L
    PerArm<ArmMotion> motion;
    PerArm<ArmState> entry;
    PerArm<ArmState> exit;

    double duration() const { return t_end - t_start; }
    ArmState state_at(Arm arm, double t) const;
};

using StagePair = PerArm<ArmState>;

StageSolution solve_stage1(const DerivedParams& p);
StageSolution solve_stage2(const StagePair& entry, const DerivedParams& p);
StageSolution solve_stage3(const StagePair& entry, const DerivedParams& p);
StageSolution solve_stage4(const StagePair& entry, const DerivedParams& p);
StageSolution solve_stage5(const StagePair& entry, const DerivedParams& p);

/// Stage-3 half duration from the arm-difference state at T2.
double stage3_t_star(double dx, double dv, double omega3);

struct SamplingOptions {
    double step = 1e-5;        // s
    int stage3_refinement = 20; // stage 3 sampled with step / refinement
};

struct TrajectorySample {
    double t;
    double x_right, v_right;
    double x_left, v_left;
    int stage;
};

struct TrajectoryResult {
    DerivedParams params;
    std::array<StageSolution, 5> stages;
    std::vector<TrajectorySample> samples;
    double delta_x_max = 0;
    double t_delta_x_max = 0;
    double total_duration = 0;
    double closure_position_residual = 0; ///< x_R(T5) - x_L(T5)
    double closure_velocity_right = 0;
    double closure_velocity_left = 0;
    double continuity_residual = 0;       ///< worst relative joint mismatch
    double max_field = 0;                 ///< T, max |B| along both arms
    bool field_limit_ok = true;           ///< max_field <= H_c1

    /// Boundary states T0..T5.
    std::array<StagePair, 6> boundaries() const;
};

/// Chains the five stages. Throws ConsistencyError on a broken joint.
TrajectoryResult run_protocol(const ProtocolConfig& config, const SamplingOptions& sampling = {},
                              const PhysicalConstants& constants = kNanodiamond);

/// Magnetic field magnitude seen at position x during a stage.
double stage_field(const DerivedParams& p, int stage_index, double x);

struct BaselineResult {
    double delta_x_max; // m
    double period;      // s
    double omega0;      // rad/s
};

/// One full harmonic period with a linear gradient eta0.
BaselineResult single_stage_baseline(double eta0, double mass,
                                     const PhysicalConstants& constants = kNanodiamond);

/// Gradient that gives a target single-stage separation.
double baseline_gradient_for_separation(double delta_x, double mass,
                                        const PhysicalConstants& constants = kNanodiamond);

} // namespace sgsim
