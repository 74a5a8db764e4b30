#include "semimed/linalg.hpp"

#include "semimed/core.hpp"

#include <cmath>
#include <sstream>

namespace semimed {

double rcond(const Eigen::MatrixXd& m) {
  if (m.size() == 0 || !m.allFinite()) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  const double largest = s(0);
  if (!(largest > 0.0)) return 0.0;
  return s(s.size() - 1) / largest;
}

Eigen::MatrixXd central_jacobian(const VectorMap& f, const Eigen::VectorXd& x, double rel_step) {
  const Eigen::Index m = x.size();
  Eigen::MatrixXd jac;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double h = rel_step * std::max(1.0, std::abs(x[j]));
    Eigen::VectorXd up = x;
    Eigen::VectorXd down = x;
    up[j] += h;
    down[j] -= h;
    const Eigen::VectorXd fu = f(up);
    const Eigen::VectorXd fd = f(down);
    if (j == 0) jac.resize(fu.size(), m);
    jac.col(j) = (fu - fd) / (up[j] - down[j]);
  }
  return jac;
}

Eigen::MatrixXd sandwich_cov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, std::size_t n,
                             double rcond_min) {
  if (A.rows() != A.cols() || B.rows() != A.rows() || B.cols() != A.cols() || n == 0) {
    throw NumericalError("sandwich: non-conforming A/B");
  }
  const double rc = rcond(A);
  if (!(rc > rcond_min)) {
    std::ostringstream msg;
    msg << "sandwich: estimating-equation Jacobian is singular (rcond " << rc << ")";
    throw NumericalError(msg.str());
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  const Eigen::MatrixXd a_inv = lu.inverse();
  Eigen::MatrixXd cov = a_inv * B * a_inv.transpose() / static_cast<double>(n);
  return 0.5 * (cov + cov.transpose());
}

Eigen::MatrixXd outer_product_mean(const Eigen::MatrixXd& psi) {
  return psi.transpose() * psi / static_cast<double>(psi.rows());
}

double two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

}  // namespace semimed
