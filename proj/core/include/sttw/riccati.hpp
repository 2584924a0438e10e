#pragma once

#include <Eigen/Core>

namespace sttw {

/// Fixed-point iteration for the discrete algebraic Riccati equation
///   P = A' P A - A' P B (B' P B + R)^{-1} B' P A + Q.
/// Iterates until the inf-norm change drops below `tol`; throws SolverError
/// after `max_iterations`. Every iterate is symmetrized and stays PSD.
Eigen::MatrixXd dare_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                           double tol = 1e-10, int max_iterations = 10000);

}  // namespace sttw
