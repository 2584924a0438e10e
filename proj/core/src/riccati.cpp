#include "sttw/riccati.hpp"

#include <Eigen/Dense>
#include <sstream>

#include "sttw/errors.hpp"

namespace sttw {

Eigen::MatrixXd dare_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                           double tol, int max_iterations) {
  const auto n = A.rows();
  Eigen::MatrixXd P = Q;
  for (int iter = 0; iter < max_iterations; ++iter) {
    const Eigen::MatrixXd BtP = B.transpose() * P;
    const Eigen::MatrixXd S = BtP * B + R;
    const Eigen::MatrixXd K = S.ldlt().solve(BtP * A);
    Eigen::MatrixXd P_next =
        A.transpose() * P * A - (A.transpose() * P * B) * K + Q;
    P_next = 0.5 * (P_next + P_next.transpose()).eval();
    const double diff = (P_next - P).lpNorm<Eigen::Infinity>();
    P = P_next;
    if (diff < tol) {
      return P;
    }
  }
  std::ostringstream msg;
  msg << "discrete Riccati iteration did not converge within "
      << max_iterations << " iterations (n=" << n << ")";
  throw SolverError(msg.str());
}

}  // namespace sttw
