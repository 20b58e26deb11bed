#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "sgsim/errors.hpp"
#include "sgsim/trajectory.hpp"
#include "sgsim/wavepacket.hpp"

using namespace sgsim;
using std::numbers::pi;

namespace {

constexpr double kMass = 1e-15;
constexpr double kHbar = 1.05e-34;

ProtocolConfig zero_bias()
{
    ProtocolConfig c = ProtocolConfig::table1();
    c.b0h = 0;
    return c;
}

} // namespace

TEST_SUITE("wavepacket-contrast")
{
    TEST_CASE("ground-state width")
    {
        CHECK(ground_state_width(kMass, oracle::frozen::omega1) ==
              doctest::Approx(oracle::frozen::sigma01).epsilon(1e-12));
        CHECK(ground_state_width(kMass, oracle::frozen::omega1) == doctest::Approx(1.2e-11).epsilon(0.05));
        CHECK_THROWS_AS(ground_state_width(0, 1), ConfigError);
    }

    TEST_CASE("free spreading")
    {
        const double s0 = 1.2e-11;
        CHECK(sigma_free(s0, 0, kMass) == s0);
        const double slope = kHbar / (2 * kMass * s0);
        const double t = 1e3;
        CHECK((sigma_free(s0, 2 * t, kMass) - sigma_free(s0, t, kMass)) / t == doctest::Approx(slope).epsilon(1e-9));
        CHECK_THROWS_AS(sigma_free(0, 1, kMass), ConfigError);
        CHECK_THROWS_AS(sigma_free(s0, -1, kMass), ConfigError);
    }

    TEST_CASE("harmonic width")
    {
        const double w = 353.6;
        const double g = ground_state_width(kMass, w);
        for (double t : {0.0, 1e-3, 0.01, 0.3, 7.0})
            CHECK(sigma_harmonic(g, t, kMass, w) == doctest::Approx(g).epsilon(1e-12));
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(0, 1);
        for (int i = 0; i < 100; ++i) {
            const double s0 = g * (0.1 + 10 * u(rng));
            const double t = u(rng);
            CHECK(sigma_harmonic(s0, t + pi / w, kMass, w) == doctest::Approx(sigma_harmonic(s0, t, kMass, w)).epsilon(1e-9));
        }
        CHECK(sigma_harmonic(3 * g, pi / w, kMass, w) == doctest::Approx(3 * g).epsilon(1e-12));
        CHECK_THROWS_AS(sigma_harmonic(g, 1, kMass, 0), ConfigError);
    }

    TEST_CASE("inverted width is monotone")
    {
        const double w = 31.63, s0 = 1.2e-11;
        CHECK(sigma_inverted(s0, 0, kMass, w) == s0);
        double prev = s0;
        for (int i = 1; i <= 200; ++i) {
            const double cur = sigma_inverted(s0, 0.3 * i / 200, kMass, w);
            CHECK(cur > prev);
            prev = cur;
        }
    }

    TEST_CASE("inverted spreading beats free spreading")
    {
        const double s0 = oracle::frozen::sigma01;
        const double ratio = sigma_inverted(s0, 0.3, kMass, oracle::frozen::omega2) / sigma_free(s0, 0.3, kMass);
        MESSAGE("sigma_I / sigma_free at 0.3 s = " << ratio);
        CHECK(ratio >= 10);
        const auto curve = width_curve(s0, oracle::frozen::omega2, kMass, 0.3, 31);
        CHECK(curve.size() == 31);
        CHECK(curve.front().t == 0);
        CHECK(curve.back().t == doctest::Approx(0.3));
        CHECK(curve.back().sigma_inverted > curve.back().sigma_free);
        CHECK_THROWS_AS(width_curve(s0, 1, kMass, 0.3, 1), ConfigError);
    }

    TEST_CASE("contrast")
    {
        CHECK(contrast(0, 0, 1, 1) == 1);
        CHECK(contrast(2e-9, 0, 2e-9, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
        CHECK(contrast(2e-9, 0, 2e-9, 1) == doctest::Approx(0.6065).epsilon(1e-4));
        double prev_x = 1, prev_p = 1;
        for (int i = 1; i <= 50; ++i) {
            const double cx = contrast(0.1 * i, 0, 1, 1);
            const double cp = contrast(0, -0.1 * i, 1, 1);
            CHECK(cx < prev_x);
            CHECK(cp < prev_p);
            CHECK(cx > 0);
            prev_x = cx;
            prev_p = cp;
        }
        CHECK(contrast(-0.5, 0.2, 1, 1) == contrast(0.5, -0.2, 1, 1));
        CHECK_THROWS_AS(contrast(0, 0, 0, 1), ConfigError);
        CHECK_THROWS_AS(contrast(0, 0, 1, -1), ConfigError);
    }

    TEST_CASE("width chained through the protocol")
    {
        const TrajectoryResult r = run_protocol(zero_bias());
        const WidthChain w = width_chain(r);
        CHECK(w.sigma01 == doctest::Approx(oracle::frozen::sigma01).epsilon(1e-12));
        CHECK(w.sigma05 > 1e-7);
        CHECK(w.sigma05 < 1e-6);
        CHECK(w.amplification > 1e4);
        CHECK(w.amplification < 1e5);
        CHECK(w.sigma_at_boundary[0] == w.sigma01);
        CHECK(w.sigma_at_boundary[1] == w.sigma01);
        CHECK(w.sigma_at_boundary[3] == w.sigma_at_boundary[2]);
        CHECK(w.sigma_at_boundary[5] == w.sigma05);
        const double s2 = sigma_inverted(w.sigma01, r.stages[1].duration(), kMass, r.params.omega2);
        CHECK(w.sigma_at_boundary[2] == doctest::Approx(s2).epsilon(1e-14));
        CHECK(w.sigma05 * w.sigma_p_floor == doctest::Approx(kHbar / 2).epsilon(1e-14));
        CHECK(w.harmonic_stages_approximated);
    }

    TEST_CASE("closure contrast of the zero-bias protocol")
    {
        const TrajectoryResult r = run_protocol(zero_bias());
        const WidthChain w = width_chain(r);
        const ClosureContrast c = closure_contrast(r, w);
        MESSAGE("closure contrast = " << c.value << " (dx " << c.delta_x << " m, dp " << c.delta_p << " kg m/s)");
        CHECK(c.value > 0.999);
        CHECK(c.value <= 1);
        CHECK(c.packet.sigma_x * c.packet.sigma_p >= kHbar / 2 * (1 - 1e-14));
        CHECK(c.packet.t == r.total_duration);
        CHECK(c.delta_x == std::abs(r.closure_position_residual));
    }

    TEST_CASE("quantisation-axis estimates")
    {
        const FeasibilityReport f = feasibility_estimates(kMass, 1e-3);
        CHECK(f.larmor_hz == doctest::Approx(2.8e7).epsilon(0.05));
        CHECK(f.larmor_hz == doctest::Approx(1.761e11 * 1e-3 / (2 * pi)).epsilon(1e-14));
        CHECK(f.delta_y == doctest::Approx(oracle::frozen::delta_y).epsilon(1e-12));
        CHECK(f.delta_y == doctest::Approx(5e-12).epsilon(0.05));
        CHECK(f.max_transverse_field == doctest::Approx(oracle::frozen::transverse_field).epsilon(1e-12));
        CHECK(f.max_transverse_field == doctest::Approx(1.5e-7).epsilon(0.05));
        CHECK(f.bias_dominates);
        CHECK_FALSE(feasibility_estimates(kMass, 0).bias_dominates);
        CHECK_FALSE(feasibility_estimates(kMass, 1e-6).bias_dominates);
        CHECK_THROWS_AS(feasibility_estimates(kMass, -1), ConfigError);
        CHECK_THROWS_AS(feasibility_estimates(kMass, 1e-3, 0), ConfigError);
    }
}
