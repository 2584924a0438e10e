#include "sttw/observer.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <doctest.h>

#include "sttw/dynamics.hpp"
#include "sttw/equilibrium.hpp"
#include "sttw/errors.hpp"
#include "sttw/riccati.hpp"
#include "test_util.hpp"

using namespace sttw;

namespace {
const RobotParams params;
}

TEST_CASE("extended_dynamics") {
  test::UniformSource rng(3);
  for (int i = 0; i < 50; ++i) {
    ExtendedVec xbar;
    xbar.head<kStateDim>() = test::random_state(rng);
    xbar.tail<kDisturbanceDim>() = test::random_disturbance(rng);
    const InputVec u = test::random_input(rng);
    const ExtendedVec out = extended_dynamics(xbar, u, params);
    // Constant-disturbance internal model: d-rows vanish identically.
    CHECK(out.tail<kDisturbanceDim>().lpNorm<Eigen::Infinity>() == 0.0);
    const StateVec expect =
        f_sys(xbar.head<kStateDim>(), u, xbar.tail<kDisturbanceDim>(),
              params);
    CHECK((out.head<kStateDim>() - expect).lpNorm<Eigen::Infinity>() == 0.0);
  }

  // Disturbed equilibrium with u = [-d_r, 0] is a fixed point of the
  // extended field.
  const DisturbanceVec d(0.3, 0.6);
  const EquilibriumPoint eq =
      track_stand_equilibrium(Reference{0.0, 0.3}, d, params);
  ExtendedVec xbar;
  xbar << eq.x_e, d;
  const ExtendedVec out = extended_dynamics(xbar, eq.u_e, params);
  CHECK(out.lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("measure") {
  StateVec x;
  x << 1e-3, 2e-3, 3e-3, 4e-3, 5e-3;
  const MeasVec y = measure(x);
  CHECK(y[0] == 1e-3);
  CHECK(y[1] == 2e-3);
  CHECK(y[2] == 3e-3);
  CHECK(y[3] == 4e-3);
  // Roll rate never appears in the measurement map.
  CHECK(extended_measurement_matrix().col(kIdxPhiDot).norm() == 0.0);

  const EquilibriumPoint eq = track_stand_equilibrium(
      Reference{0.7, 0.3}, DisturbanceVec::Zero(), params);
  const MeasVec ym = measure(eq.x_e);
  CHECK(ym[0] == doctest::Approx(0.7));
  CHECK(ym[1] == 0.0);
  CHECK(ym[2] == doctest::Approx(0.3));
  CHECK(ym[3] == doctest::Approx(eq.x_e[kIdxPhi]));
}

TEST_CASE("steady_state_gain scalar oracle") {
  // x_{k+1} = f x_k + w, y = x + v: the DARE has a closed quadratic form.
  for (double f : {0.98, 1.05}) {
    const double q = 0.01, r = 0.1;
    Eigen::MatrixXd F(1, 1), C(1, 1), Q(1, 1), R(1, 1);
    F << f;
    C << 1.0;
    Q << q;
    R << r;
    const SteadyStateGain ss = steady_state_gain(F, C, Q, R);

    const double b = r - f * f * r - q;
    const double p = (-b + std::sqrt(b * b + 4.0 * q * r)) / 2.0;
    const double gain = p / (p + r);
    CHECK(ss.P(0, 0) == doctest::Approx(p).epsilon(1e-8));
    CHECK(ss.L(0, 0) == doctest::Approx(gain).epsilon(1e-8));
  }
}

TEST_CASE("dare solution is symmetric positive definite") {
  const EquilibriumPoint eq = track_stand_equilibrium(
      Reference{0.0, 0.3}, DisturbanceVec::Zero(), params);
  ExtendedVec xbar;
  xbar << eq.x_e, 0.0, 0.0;
  const ObserverConfig cfg;
  const ExtendedMat F =
      discretize_transition(extended_jacobian(xbar, eq.u_e, params), cfg.dt);
  const SteadyStateGain ss =
      steady_state_gain(F, extended_measurement_matrix(), cfg.Q(), cfg.R());
  CHECK((ss.P - ss.P.transpose()).lpNorm<Eigen::Infinity>() < 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ss.P);
  CHECK(eig.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("steady-state gain stabilizes the discrete observer") {
  const ObserverConfig cfg;
  for (double delta_e : {-0.6, -0.3, -0.1, 0.1, 0.3, 0.6}) {
    const EquilibriumPoint eq = track_stand_equilibrium(
        Reference{0.0, delta_e}, DisturbanceVec::Zero(), params);
    ExtendedVec xbar;
    xbar << eq.x_e, 0.0, 0.0;
    const ExtendedMat F = discretize_transition(
        extended_jacobian(xbar, eq.u_e, params), cfg.dt);
    const ExtendedMeasMat C = extended_measurement_matrix();
    const SteadyStateGain ss = steady_state_gain(F, C, cfg.Q(), cfg.R());
    const ExtendedMat closed = (ExtendedMat::Identity() - ss.L * C) * F;
    const Eigen::VectorXcd eigs = closed.eigenvalues();
    CHECK(eigs.cwiseAbs().maxCoeff() < 1.0);
  }
}

TEST_CASE("observer fixed point: exact init, zero noise, constant d") {
  const DisturbanceVec d(0.1, 0.4);
  const EquilibriumPoint eq =
      track_stand_equilibrium(Reference{0.0, 0.3}, d, params);
  const ObserverConfig cfg;

  StateVec x_true = eq.x_e;
  ExtendedEstimate est;
  est.xbar << x_true, d;
  est.P = cfg.p_initial.asDiagonal();

  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    x_true = integrate_rk4(x_true, eq.u_e, d, params, cfg.dt);
    est = observer_step(est, eq.u_e, measure(x_true), cfg, params);
    ExtendedVec truth;
    truth << x_true, d;
    worst = std::max(worst,
                     (est.xbar - truth).lpNorm<Eigen::Infinity>());
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("estimation error converges from random initial errors") {
  const DisturbanceVec d(0.05, 0.3);
  const EquilibriumPoint eq =
      track_stand_equilibrium(Reference{0.0, 0.3}, d, params);
  ObserverConfig cfg;
  test::UniformSource rng(23);

  for (int trial = 0; trial < 5; ++trial) {
    StateVec x_true = eq.x_e;
    ExtendedVec truth;
    truth << x_true, d;
    ExtendedVec err;
    for (int i = 0; i < kExtendedDim; ++i) err[i] = rng(-1.0, 1.0);
    err *= 0.1 / err.norm();

    ExtendedEstimate est;
    est.xbar = truth + err;
    est.P = cfg.p_initial.asDiagonal();

    for (int k = 0; k < 2400; ++k) {  // 12 s at 200 Hz
      x_true = integrate_rk4(x_true, eq.u_e, d, params, cfg.dt);
      est = observer_step(est, eq.u_e, measure(x_true), cfg, params);
    }
    truth << x_true, d;
    CHECK((est.xbar - truth).lpNorm<Eigen::Infinity>() < 1e-6);
  }
}

TEST_CASE("covariance stays symmetric PSD over 1e4 filtered steps") {
  const DisturbanceVec d(0.0, 0.2);
  const EquilibriumPoint eq =
      track_stand_equilibrium(Reference{0.0, 0.3}, d, params);
  ObserverConfig cfg;
  cfg.mode = ObserverMode::kFilteredCovariance;

  StateVec x_true = eq.x_e;
  ExtendedEstimate est;
  est.xbar << x_true, d;
  est.P = cfg.p_initial.asDiagonal();

  for (int k = 0; k < 10000; ++k) {
    x_true = integrate_rk4(x_true, eq.u_e, d, params, cfg.dt);
    est = observer_step(est, eq.u_e, measure(x_true), cfg, params);
    CHECK((est.P - est.P.transpose()).lpNorm<Eigen::Infinity>() < 1e-10);
    if (k % 100 == 0) {
      Eigen::SelfAdjointEigenSolver<ExtendedMat> eig(est.P);
      CHECK(eig.eigenvalues().minCoeff() > 0.0);
    }
  }
  CHECK(!est.recovered_once);
}

TEST_CASE("undetectable pair raises a configuration error") {
  // Unstable mode decoupled from the output: (F, C) undetectable.
  Eigen::MatrixXd F(2, 2), C(1, 2), Q(2, 2), R(1, 1);
  F << 1.1, 0.0, 0.0, 0.5;
  C << 0.0, 1.0;
  Q.setIdentity();
  R << 0.1;
  CHECK_THROWS_AS(steady_state_gain(F, C, Q, R), ConfigError);
}
