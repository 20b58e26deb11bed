#include "sgsim/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sgsim/errors.hpp"

namespace sgsim {

using std::numbers::pi;

ArmMotion ArmMotion::harmonic(double omega, double centre, double x0, double v0)
{
    ArmMotion m;
    m.kind = StageKind::Harmonic;
    m.omega = omega;
    m.centre = centre;
    m.x0 = x0;
    m.v0 = v0;
    const double u = x0 - centre;
    m.amplitude = std::hypot(u, v0 / omega);
    // atan2 picks the branch that reproduces the entry state: sin(phase) ~ u, cos(phase) ~ v0
    m.phase = std::atan2(u * omega, v0);
    return m;
}

ArmMotion ArmMotion::inverted(double omega, double x0, double v0)
{
    ArmMotion m;
    m.kind = StageKind::InvertedHarmonic;
    m.omega = omega;
    m.x0 = x0;
    m.v0 = v0;
    m.amplitude = v0 / omega;
    return m;
}

double ArmMotion::position(double tau) const
{
    const double wt = omega * tau;
    if (kind == StageKind::Harmonic)
        return centre + (x0 - centre) * std::cos(wt) + v0 / omega * std::sin(wt);
    return x0 * std::cosh(wt) + v0 / omega * std::sinh(wt);
}

double ArmMotion::velocity(double tau) const
{
    const double wt = omega * tau;
    if (kind == StageKind::Harmonic)
        return -(x0 - centre) * omega * std::sin(wt) + v0 * std::cos(wt);
    return x0 * omega * std::sinh(wt) + v0 * std::cosh(wt);
}

double ArmMotion::acceleration(double tau) const
{
    if (kind == StageKind::Harmonic)
        return -omega * omega * (position(tau) - centre);
    return omega * omega * position(tau);
}

double ArmMotion::compact_position(double tau) const
{
    if (kind == StageKind::Harmonic)
        return centre + amplitude * std::sin(omega * tau + phase);
    return position(tau);
}

ArmState StageSolution::state_at(Arm arm, double t) const
{
    const double tau = t - t_start;
    return {t, motion[arm].position(tau), motion[arm].velocity(tau), arm};
}

namespace {

StageSolution finish(StageSolution s)
{
    for (Arm a : kArms) {
        s.entry[a] = s.state_at(a, s.t_start);
        s.exit[a] = s.state_at(a, s.t_end);
    }
    return s;
}

double stage1_duration(const DerivedParams& p)
{
    return p.config.model == ModelVariant::ModelII ? pi / (2.0 * p.omega1) : pi / p.omega1;
}

double stage5_duration(const DerivedParams& p)
{
    return p.config.model == ModelVariant::ModelII ? pi / (2.0 * p.omega5) : pi / p.omega5;
}

} // namespace

StageSolution solve_stage1(const DerivedParams& p)
{
    StageSolution s;
    s.index = 1;
    s.kind = StageKind::Harmonic;
    s.t_start = 0.0;
    s.t_end = stage1_duration(p);
    for (Arm a : kArms)
        s.motion[a] = ArmMotion::harmonic(p.omega1, -p.n1[a], 0.0, 0.0);
    return finish(s);
}

StageSolution solve_stage2(const StagePair& entry, const DerivedParams& p)
{
    StageSolution s;
    s.index = 2;
    s.kind = StageKind::InvertedHarmonic;
    s.t_start = entry.right.t;
    s.t_end = s.t_start + p.config.ihp_stage_phase / p.omega2;
    for (Arm a : kArms)
        s.motion[a] = ArmMotion::inverted(p.omega2, entry[a].x, entry[a].v);
    return finish(s);
}

double stage3_t_star(double dx, double dv, double omega3)
{
    // dx(tau) = N sin(omega tau + theta0); extremum where the argument reaches pi/2 mod pi
    const double theta0 = std::atan2(dx * omega3, dv);
    double phase = std::fmod(pi / 2.0 - theta0, pi);
    if (phase < 0)
        phase += pi;
    if (phase <= 1e-12)
        phase = pi;
    const double t_star = phase / omega3;
    if (!(std::isfinite(t_star) && t_star > 0))
        throw ConsistencyError("stage 3: no positive T* found");
    return t_star;
}

StageSolution solve_stage3(const StagePair& entry, const DerivedParams& p)
{
    StageSolution s;
    s.index = 3;
    s.kind = StageKind::Harmonic;
    s.t_start = entry.right.t;
    const double dx = entry.right.x - entry.left.x;
    const double dv = entry.right.v - entry.left.v;
    s.t_star = stage3_t_star(dx, dv, p.omega3);
    s.t_end = s.t_start + 2.0 * s.t_star;
    const double centre = -p.config.b0h / p.config.eta_hp;
    for (Arm a : kArms)
        s.motion[a] = ArmMotion::harmonic(p.omega3, centre, entry[a].x, entry[a].v);
    return finish(s);
}

StageSolution solve_stage4(const StagePair& entry, const DerivedParams& p)
{
    StageSolution s;
    s.index = 4;
    s.kind = StageKind::InvertedHarmonic;
    s.t_start = entry.right.t;
    s.t_end = s.t_start + p.config.ihp_stage_phase / p.omega4;
    for (Arm a : kArms)
        s.motion[a] = ArmMotion::inverted(p.omega4, entry[a].x, entry[a].v);
    return finish(s);
}

StageSolution solve_stage5(const StagePair& entry, const DerivedParams& p)
{
    StageSolution s;
    s.index = 5;
    s.kind = StageKind::Harmonic;
    s.t_start = entry.right.t;
    s.t_end = s.t_start + stage5_duration(p);
    for (Arm a : kArms)
        s.motion[a] = ArmMotion::harmonic(p.omega5, -p.n1[a], entry[a].x, entry[a].v);
    return finish(s);
}

double stage_field(const DerivedParams& p, int stage_index, double x)
{
    if (stage_index == 2 || stage_index == 4)
        return std::abs(p.config.b0i - p.config.eta_ihp * x * x);
    return std::abs(p.config.b0h + p.config.eta_hp * x);
}

std::array<StagePair, 6> TrajectoryResult::boundaries() const
{
    std::array<StagePair, 6> b;
    b[0] = stages[0].entry;
    for (int i = 0; i < 5; ++i)
        b[i + 1] = stages[i].exit;
    return b;
}

namespace {

void append_samples(const StageSolution& s, double step, bool include_end,
                    std::vector<TrajectorySample>& out)
{
    const double span = s.duration();
    const auto n = static_cast<long>(std::ceil(span / step - 1e-9));
    const long count = std::max<long>(n, 1);
    for (long i = 0; i <= count; ++i) {
        if (i == count && !include_end)
            break;
        const double t = (i == count) ? s.t_end : s.t_start + span * static_cast<double>(i) / count;
        const ArmState r = s.state_at(Arm::Right, t);
        const ArmState l = s.state_at(Arm::Left, t);
        out.push_back({t, r.x, r.v, l.x, l.v, s.index});
    }
}

} // namespace

TrajectoryResult run_protocol(const ProtocolConfig& config, const SamplingOptions& sampling,
                              const PhysicalConstants& constants)
{
    if (!(sampling.step > 0) || sampling.stage3_refinement < 1)
        throw ConfigError("sample_step_s: must be > 0");

    TrajectoryResult r;
    r.params = derive_params(config, constants);
    const DerivedParams& p = r.params;

    r.stages[0] = solve_stage1(p);
    r.stages[1] = solve_stage2(r.stages[0].exit, p);
    r.stages[2] = solve_stage3(r.stages[1].exit, p);
    r.stages[3] = solve_stage4(r.stages[2].exit, p);
    r.stages[4] = solve_stage5(r.stages[3].exit, p);
    r.total_duration = r.stages[4].t_end;

    // Stage-3 peak of the arm difference sits exactly at T2 + T*.
    const StageSolution& s3 = r.stages[2];
    const double t_peak = s3.t_start + s3.t_star;
    r.delta_x_max = std::abs(s3.state_at(Arm::Right, t_peak).x - s3.state_at(Arm::Left, t_peak).x);
    r.t_delta_x_max = t_peak;

    for (const StageSolution& s : r.stages) {
        const double step = s.index == 3 ? sampling.step / sampling.stage3_refinement : sampling.step;
        append_samples(s, step, s.index == 5, r.samples);
    }
    for (const TrajectorySample& smp : r.samples) {
        const double d = std::abs(smp.x_right - smp.x_left);
        if (d > r.delta_x_max) {
            r.delta_x_max = d;
            r.t_delta_x_max = smp.t;
        }
        r.max_field = std::max({r.max_field, stage_field(p, smp.stage, smp.x_right),
                                stage_field(p, smp.stage, smp.x_left)});
    }
    for (const StageSolution& s : r.stages)
        for (Arm a : kArms)
            r.max_field = std::max({r.max_field, stage_field(p, s.index, s.entry[a].x),
                                    stage_field(p, s.index, s.exit[a].x)});
    r.field_limit_ok = r.max_field <= kNiobiumHc1;

    // Joint check: the amplitude/phase form of each stage must land on the previous exit.
    double v_scale = 0;
    for (const StageSolution& s : r.stages)
        for (Arm a : kArms)
            v_scale = std::max(v_scale, std::abs(s.exit[a].v));
    for (int i = 1; i < 5; ++i) {
        const StageSolution& prev = r.stages[i - 1];
        const StageSolution& next = r.stages[i];
        for (Arm a : kArms) {
            const double x_prev = prev.motion[a].compact_position(prev.duration());
            const double x_next = next.motion[a].compact_position(0.0);
            const double v_prev = prev.motion[a].velocity(prev.duration());
            const double v_next = next.motion[a].velocity(0.0);
            const double ex = std::abs(x_prev - x_next) / (std::abs(x_prev) + r.delta_x_max);
            const double ev = std::abs(v_prev - v_next) / (std::abs(v_prev) + v_scale);
            r.continuity_residual = std::max({r.continuity_residual, ex, ev});
        }
        if (std::abs(prev.t_end - next.t_start) > 0)
            throw ConsistencyError("stage " + std::to_string(i) + " end time does not meet stage " +
                                   std::to_string(i + 1));
    }
    if (!(r.continuity_residual <= 1e-10))
        throw ConsistencyError("stage continuity residual " + std::to_string(r.continuity_residual) +
                               " exceeds 1e-10");

    const StagePair& end = r.stages[4].exit;
    r.closure_position_residual = end.right.x - end.left.x;
    r.closure_velocity_right = end.right.v;
    r.closure_velocity_left = end.left.v;
    return r;
}

BaselineResult single_stage_baseline(double eta0, double mass, const PhysicalConstants& c)
{
    if (!(eta0 > 0) || !(mass > 0))
        throw ConfigError("baseline: eta0 and mass must be > 0");
    const double w0 = harmonic_frequency(eta0, c);
    return {std::abs(4.0 * c.hbar * c.gamma_e * eta0 / (mass * w0 * w0)), 2.0 * pi / w0, w0};
}

double baseline_gradient_for_separation(double delta_x, double mass, const PhysicalConstants& c)
{
    if (!(delta_x > 0) || !(mass > 0))
        throw ConfigError("baseline: separation and mass must be > 0");
    // delta_x = 4 hbar gamma_e / (m k eta0) with k = -chi/mu0
    const double k = -c.chi_rho / c.mu0;
    if (!(k > 0))
        throw InvalidMaterial("chi_rho must be negative (diamagnetic)");
    return 4.0 * c.hbar * c.gamma_e / (mass * k * delta_x);
}

} // namespace sgsim
