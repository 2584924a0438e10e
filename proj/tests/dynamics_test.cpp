#include "sttw/dynamics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <doctest.h>

#include "sttw/errors.hpp"
#include "test_util.hpp"

using namespace sttw;

namespace {
const RobotParams params;  // bench defaults
}

TEST_CASE("delta_projection") {
  CHECK(delta_projection(0.0, 0.2, params) == doctest::Approx(0.0));

  // Direct-evaluation oracle at phi = 0.
  const double expected = std::atan(std::tan(0.3) * std::cos(params.lambda));
  CHECK(delta_projection(0.3, 0.0, params) == doctest::Approx(expected));
  CHECK(delta_projection(0.3, 0.0, params) ==
        doctest::Approx(0.27333679963149865).epsilon(1e-12));

  // Monotone in 1/cos(phi): scanning phi upward grows the projection.
  double prev = delta_projection(0.3, 0.0, params);
  for (double phi = 0.05; phi <= 0.5; phi += 0.05) {
    const double cur = delta_projection(0.3, phi, params);
    CHECK(cur > prev);
    prev = cur;
  }

  CHECK_THROWS_AS(delta_projection(1.6, 0.0, params), DomainError);
  CHECK_THROWS_AS(delta_projection(0.3, 1.57, params), DomainError);
}

TEST_CASE("trail_length") {
  CHECK(trail_length(0.0, params) == doctest::Approx(0.024).epsilon(1e-15));
  CHECK(trail_length(0.4, params) == doctest::Approx(trail_length(-0.4, params)));
  const double expected =
      0.024 + 0.1 * std::tan(params.lambda) * (std::cos(0.5) - 1.0);
  CHECK(trail_length(0.5, params) == doctest::Approx(expected));
  CHECK(trail_length(0.5, params) ==
        doctest::Approx(0.018291581111776527).epsilon(1e-12));
}

TEST_CASE("yaw_deviation") {
  CHECK(yaw_deviation(0.0, 0.1, params) == doctest::Approx(0.0));

  // Sign scan: gamma carries the sign of delta at phi = 0 as long as the
  // trail stays positive (it goes negative past |delta| ~ 1.06 rad for the
  // bench geometry, flipping gamma with it).
  for (double delta = -1.05; delta <= 1.05; delta += 0.05) {
    if (std::abs(delta) < 1e-9) continue;
    CHECK(trail_length(delta, params) > 0.0);
    CHECK(yaw_deviation(delta, 0.0, params) * delta > 0.0);
  }
  CHECK(trail_length(1.2, params) < 0.0);
  CHECK(yaw_deviation(1.2, 0.0, params) < 0.0);

  // Composition of the two geometry oracles.
  const double expected = trail_length(0.3, params) / params.b *
                          std::sin(delta_projection(0.3, 0.0, params));
  CHECK(yaw_deviation(0.3, 0.0, params) == doctest::Approx(expected));
}

TEST_CASE("turning_radius") {
  CHECK(!turning_radius(0.0, 0.1, params).has_value());

  // delta chosen so the projected steering angle is pi/4 -> R = b.
  const double delta_for_45 = std::atan(1.0 / std::cos(params.lambda));
  const auto r45 = turning_radius(delta_for_45, 0.0, params);
  REQUIRE(r45.has_value());
  CHECK(*r45 == doctest::Approx(params.b).epsilon(1e-12));

  const auto r = turning_radius(0.3, 0.0, params);
  REQUIRE(r.has_value());
  CHECK(*r ==
        doctest::Approx(params.b / std::tan(delta_projection(0.3, 0.0, params))));
}

TEST_CASE("lateral_acceleration") {
  StateVec x = StateVec::Zero();
  x[kIdxDelta] = 0.4;
  x[kIdxPhi] = 0.2;
  x[kIdxPhiDot] = 1.0;
  CHECK(lateral_acceleration(x, 0.0, 0.0, params) == doctest::Approx(0.0));

  // Only the v_r_dot tan(delta) term survives at v_r = 0, phi = 0.
  StateVec x2 = StateVec::Zero();
  x2[kIdxDelta] = 0.3;
  const double expected = params.a * std::cos(params.lambda) / params.b *
                          std::tan(0.3);
  CHECK(lateral_acceleration(x2, 1.0, 0.0, params) == doctest::Approx(expected));
  CHECK(lateral_acceleration(x2, 1.0, 0.0, params) ==
        doctest::Approx(0.09619985111948046).epsilon(1e-12));

  // Mirror symmetry scan: odd under (delta, phi, phi_dot, delta_dot) sign
  // flip with v_r, v_r_dot fixed.
  test::UniformSource rng(42);
  for (int i = 0; i < 200; ++i) {
    StateVec xs = test::random_state(rng);
    const double v_r_dot = rng(-2.0, 2.0);
    const double delta_dot = rng(-3.0, 3.0);
    StateVec xm = xs;
    xm[kIdxDelta] = -xs[kIdxDelta];
    xm[kIdxPhi] = -xs[kIdxPhi];
    xm[kIdxPhiDot] = -xs[kIdxPhiDot];
    const double plus = lateral_acceleration(xs, v_r_dot, delta_dot, params);
    const double minus = lateral_acceleration(xm, v_r_dot, -delta_dot, params);
    CHECK(plus == doctest::Approx(-minus).epsilon(1e-12));
  }
}

TEST_CASE("f_sys equilibrium and torque gain") {
  // Closed-form equilibrium rows vanish.
  const double phi_e = std::asin(
      params.a * params.c / params.b * std::cos(params.lambda) * 0.3 /
      params.h);
  StateVec x_e;
  x_e << 1.0, 0.0, 0.3, phi_e, 0.0;
  const StateVec xdot =
      f_sys(x_e, InputVec::Zero(), DisturbanceVec::Zero(), params);
  CHECK(xdot.lpNorm<Eigen::Infinity>() < 1e-12);

  // Rear torque gain beta2 = r / (I_r + m r^2).
  StateVec x = StateVec::Zero();
  const StateVec xdot2 =
      f_sys(x, InputVec(1.0, 0.0), DisturbanceVec::Zero(), params);
  CHECK(xdot2[kIdxVr] == doctest::Approx(0.1 / 0.094).epsilon(1e-12));
  CHECK(xdot2[kIdxVr] == doctest::Approx(1.0638297872340425).epsilon(1e-12));
}

TEST_CASE("f_sys mirror symmetry") {
  test::UniformSource rng(7);
  for (int i = 0; i < 1000; ++i) {
    const StateVec x = test::random_state(rng);
    const InputVec u = test::random_input(rng);
    const DisturbanceVec d = test::random_disturbance(rng);
    StateVec xm = x;
    xm[kIdxDelta] = -x[kIdxDelta];
    xm[kIdxPhi] = -x[kIdxPhi];
    xm[kIdxPhiDot] = -x[kIdxPhiDot];
    const InputVec um(u[kIdxTauR], -u[kIdxDeltaDot]);
    const DisturbanceVec dm(d[kIdxDr], -d[kIdxDPhi]);

    const StateVec f = f_sys(x, u, d, params);
    const StateVec fm = f_sys(xm, um, dm, params);
    CHECK(f[kIdxS] == doctest::Approx(fm[kIdxS]).epsilon(1e-12));
    CHECK(f[kIdxVr] == doctest::Approx(fm[kIdxVr]).epsilon(1e-12));
    CHECK(f[kIdxDelta] == doctest::Approx(-fm[kIdxDelta]).epsilon(1e-12));
    CHECK(f[kIdxPhi] == doctest::Approx(-fm[kIdxPhi]).epsilon(1e-12));
    CHECK(f[kIdxPhiDot] == doctest::Approx(-fm[kIdxPhiDot]).epsilon(1e-12));
  }
}

TEST_CASE("structured_form reproduces f_sys") {
  test::UniformSource rng(11);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const StateVec x = test::random_state(rng);
    const InputVec u = test::random_input(rng);
    const DisturbanceVec d = test::random_disturbance(rng);
    const StructuredDynamics sd = structured_form(x, params);
    const StateVec recomposed = sd.f + sd.G_u * u + sd.G_d * d;
    const StateVec direct = f_sys(x, u, d, params);
    worst = std::max(worst,
                     (recomposed - direct).lpNorm<Eigen::Infinity>());
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("structured_form matrix layout") {
  test::UniformSource rng(13);
  for (int i = 0; i < 50; ++i) {
    const StateVec x = test::random_state(rng);
    const StructuredDynamics sd = structured_form(x, params);
    CHECK(sd.G_u.row(kIdxS).norm() == 0.0);
    CHECK(sd.G_u.row(kIdxPhi).norm() == 0.0);
    CHECK(sd.G_u(kIdxDelta, kIdxTauR) == 0.0);
    CHECK(sd.G_u(kIdxDelta, kIdxDeltaDot) == 1.0);
    // Matched channel: d_r enters exactly like tau_r.
    CHECK((sd.G_d.col(kIdxDr) - sd.G_u.col(kIdxTauR)).norm() == 0.0);
  }
}

TEST_CASE("linearize: analytic matches finite differences") {
  test::UniformSource rng(17);
  for (int i = 0; i < 100; ++i) {
    const StateVec x = test::random_state(rng);
    const InputVec u = test::random_input(rng);
    const DisturbanceVec d = test::random_disturbance(rng);
    const LinearizedModel an = linearize(x, u, d, params);
    const LinearizedModel fd =
        linearize(x, u, d, params, LinearizationMethod::kFiniteDifference);
    CHECK(an.A(kIdxS, kIdxVr) == 1.0);
    for (int r = 0; r < kStateDim; ++r) {
      for (int c = 0; c < kStateDim; ++c) {
        CHECK(std::abs(an.A(r, c) - fd.A(r, c)) <
              1e-5 * std::max(1.0, std::abs(an.A(r, c))));
      }
    }
    CHECK((an.B_u - fd.B_u).lpNorm<Eigen::Infinity>() < 1e-5);
    CHECK((an.B_d - fd.B_d).lpNorm<Eigen::Infinity>() < 1e-5);
    // Input column 2 is [0, 0, 1, 0, beta4]^T.
    CHECK(an.B_u(kIdxS, kIdxDeltaDot) == 0.0);
    CHECK(an.B_u(kIdxVr, kIdxDeltaDot) == 0.0);
    CHECK(an.B_u(kIdxDelta, kIdxDeltaDot) == 1.0);
    CHECK(an.B_u(kIdxPhi, kIdxDeltaDot) == 0.0);
  }
}

TEST_CASE("controllability at track-stand equilibria") {
  for (double delta_e : {-0.6, -0.3, -0.1, 0.1, 0.3, 0.6}) {
    const double phi_e = std::asin(params.a * params.c / params.b *
                                   std::cos(params.lambda) * delta_e /
                                   params.h);
    StateVec x_e;
    x_e << 0.0, 0.0, delta_e, phi_e, 0.0;
    const LinearizedModel lin =
        linearize(x_e, InputVec::Zero(), DisturbanceVec::Zero(), params);

    Eigen::Matrix<double, kStateDim, kStateDim * kInputDim> ctrb;
    Eigen::Matrix<double, kStateDim, kInputDim> block = lin.B_u;
    for (int k = 0; k < kStateDim; ++k) {
      ctrb.block<kStateDim, kInputDim>(0, k * kInputDim) = block;
      block = lin.A * block;
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(ctrb);
    const auto& sv = svd.singularValues();
    CHECK(sv(kStateDim - 1) / sv(0) > 1e-8);
  }
}

TEST_CASE("integrate_rk4") {
  SUBCASE("equilibrium with matching disturbance is a fixed point") {
    const DisturbanceVec d(0.4, 0.1);
    const double arg = (params.m * params.g * params.a * params.c / params.b *
                            std::cos(params.lambda) * 0.3 -
                        d[kIdxDPhi]) /
                       (params.m * params.g * params.h);
    StateVec x_e;
    x_e << 0.0, 0.0, 0.3, std::asin(arg), 0.0;
    const InputVec u_e(-d[kIdxDr], 0.0);
    const StateVec next = integrate_rk4(x_e, u_e, d, params, 0.01);
    CHECK((next - x_e).lpNorm<Eigen::Infinity>() < 1e-12);
  }

  SUBCASE("fourth-order convergence") {
    StateVec x0;
    x0 << 0.0, 0.3, 0.2, 0.05, 0.1;
    const InputVec u(0.5, 0.3);
    const DisturbanceVec d(0.02, 0.05);
    const double T = 0.2;
    const StateVec ref = integrate_rk4(x0, u, d, params, T, 3200);
    const double err_h = (integrate_rk4(x0, u, d, params, T, 8) - ref).norm();
    const double err_h2 = (integrate_rk4(x0, u, d, params, T, 16) - ref).norm();
    const double order = std::log2(err_h / err_h2);
    CHECK(order > 3.7);
    CHECK(order < 4.3);
  }

  SUBCASE("upright rest with zero steer is unstable in roll") {
    StateVec x = StateVec::Zero();
    x[kIdxPhi] = 0.01;
    double prev = x[kIdxPhi];
    for (int i = 0; i < 500; ++i) {
      x = integrate_rk4(x, InputVec::Zero(), DisturbanceVec::Zero(), params,
                        1e-3);
      CHECK(x[kIdxPhi] > prev);
      prev = x[kIdxPhi];
    }
  }

  SUBCASE("open-loop rest at the symmetric equilibrium stays at rest") {
    const StateVec x = StateVec::Zero();
    const StateVec next =
        integrate_rk4(x, InputVec::Zero(), DisturbanceVec::Zero(), params,
                      1e-3, 10);
    CHECK(next.lpNorm<Eigen::Infinity>() == 0.0);
  }
}
