#include "sgsim/ode_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "sgsim/errors.hpp"

namespace sgsim {

namespace odeint = boost::numeric::odeint;
using std::numbers::pi;

namespace {

using State = std::array<double, 2>;

double energy_scale(const ArmDynamics& d, double x, double v)
{
    return 0.5 * v * v + 0.5 * std::abs(d.k) * x * x + 0.25 * std::abs(d.cubic) * x * x * x * x +
           std::abs(d.drive * x);
}

} // namespace

IntegrationStats integrate_arm(const ArmDynamics& dyn, double& x, double& v, double duration,
                               double rel_tol, double abs_tol)
{
    IntegrationStats stats;
    if (duration <= 0)
        return stats;

    auto rhs = [&dyn](const State& s, State& ds, double) {
        ds[0] = s[1];
        ds[1] = dyn.k * s[0] + dyn.cubic * s[0] * s[0] * s[0] + dyn.drive;
    };

    auto stepper = odeint::make_controlled(abs_tol, rel_tol, odeint::runge_kutta_dopri5<State>());
    State s{x, v};
    const double e0 = dyn.energy(x, v);
    double scale = energy_scale(dyn, x, v);
    double t = 0;
    double dt = duration * 1e-3;
    const double dt_min = duration * 1e-14;
    constexpr long kMaxAttempts = 50'000'000;

    while (t < duration) {
        if (stats.accepted + stats.rejected > kMaxAttempts)
            throw StiffnessError("ode oracle: step budget exhausted at t = " + std::to_string(t));
        double h = std::min(dt, duration - t);
        const bool last = h >= duration - t;
        const double t_before = t;
        const auto result = stepper.try_step(rhs, s, t, h);
        if (result == odeint::success) {
            ++stats.accepted;
            if (last)
                t = duration;
            scale = std::max(scale, energy_scale(dyn, s[0], s[1]));
            const double drift = std::abs(dyn.energy(s[0], s[1]) - e0);
            stats.max_energy_drift = std::max(stats.max_energy_drift, scale > 0 ? drift / scale : drift);
            // try_step proposes the next step in h; keep it unless we clipped at the end
            if (!last)
                dt = h;
        } else {
            ++stats.rejected;
            dt = h;
            if (dt < dt_min)
                throw StiffnessError("ode oracle: step size underflow (" + std::to_string(dt) +
                                     " s) at t = " + std::to_string(t_before));
        }
    }
    x = s[0];
    v = s[1];
    return stats;
}

ArmDynamics stage_dynamics(const DerivedParams& p, int stage_index, Arm arm, bool include_cubic)
{
    const ProtocolConfig& c = p.config;
    const double kdia = p.diamagnetic();
    ArmDynamics d;
    switch (stage_index) {
    case 1:
    case 5:
        d.k = -p.omega1 * p.omega1;
        d.drive = -p.force_coeff[arm] * c.eta_hp / c.mass;
        break;
    case 3:
        // spin decoupled; diamagnetic trap centred at -B0H/eta
        d.k = -p.omega3 * p.omega3;
        d.drive = -kdia * c.eta_hp * c.b0h;
        break;
    case 2:
    case 4:
        d.k = p.omega2 * p.omega2;
        // B = B0I - eta x^2 gives +2 (chi/mu0) eta^2 x^3 beyond the linear term
        d.cubic = include_cubic ? -2.0 * kdia * c.eta_ihp * c.eta_ihp : 0.0;
        break;
    default:
        throw ConfigError("stage index must be 1..5");
    }
    return d;
}

OracleResult ode_oracle(const ProtocolConfig& config, bool include_cubic, double rel_tol,
                        double abs_tol, const PhysicalConstants& constants)
{
    if (!(rel_tol > 0 && rel_tol <= 1e-3) || !(abs_tol > 0 && abs_tol <= 1e-3))
        throw ConfigError("ode oracle: tolerances must lie in (0, 1e-3]");
    const DerivedParams p = derive_params(config, constants);

    OracleResult r;
    StagePair cur;
    cur.right = {0, 0, 0, Arm::Right};
    cur.left = {0, 0, 0, Arm::Left};
    r.boundaries[0] = cur;

    const bool model2 = config.model == ModelVariant::ModelII;
    double t = 0;

    auto advance = [&](int stage, double duration, IntegrationStats& acc) {
        for (Arm a : kArms) {
            const ArmDynamics dyn = stage_dynamics(p, stage, a, include_cubic);
            const IntegrationStats st = integrate_arm(dyn, cur[a].x, cur[a].v, duration, rel_tol, abs_tol);
            acc.accepted += st.accepted;
            acc.rejected += st.rejected;
            acc.max_energy_drift = std::max(acc.max_energy_drift, st.max_energy_drift);
        }
        t += duration;
        for (Arm a : kArms)
            cur[a].t = t;
    };

    for (int stage = 1; stage <= 5; ++stage) {
        double duration = 0;
        switch (stage) {
        case 1: duration = model2 ? pi / (2 * p.omega1) : pi / p.omega1; break;
        case 2: duration = config.ihp_stage_phase / p.omega2; break;
        case 4: duration = config.ihp_stage_phase / p.omega4; break;
        case 5: duration = model2 ? pi / (2 * p.omega5) : pi / p.omega5; break;
        default: break;
        }
        if (stage == 3) {
            r.t_star = stage3_t_star(cur.right.x - cur.left.x, cur.right.v - cur.left.v, p.omega3);
            advance(3, r.t_star, r.stats[2]);
            r.delta_x_max = std::abs(cur.right.x - cur.left.x);
            advance(3, r.t_star, r.stats[2]);
            duration = 2 * r.t_star;
        } else {
            advance(stage, duration, r.stats[stage - 1]);
        }
        r.durations[stage - 1] = duration;
        r.boundaries[stage] = cur;
        r.delta_x_max = std::max(r.delta_x_max, std::abs(cur.right.x - cur.left.x));
    }

    r.total_duration = t;
    r.closure_position_residual = cur.right.x - cur.left.x;
    r.closure_velocity_right = cur.right.v;
    r.closure_velocity_left = cur.left.v;
    return r;
}

} // namespace sgsim
