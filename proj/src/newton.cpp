#include "semimed/newton.hpp"

#include <cmath>

namespace semimed {

namespace {

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Eigen::MatrixXd forward_jacobian(const VectorMap& f, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& fx, double rel_step) {
  Eigen::MatrixXd jac(fx.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xh = x;
    xh[j] += rel_step * std::max(1.0, std::abs(x[j]));
    jac.col(j) = (f(xh) - fx) / (xh[j] - x[j]);
  }
  return jac;
}

}  // namespace

NewtonResult newton_root(const VectorMap& f, const Eigen::VectorXd& x0,
                         const NewtonOptions& options) {
  NewtonResult r;
  r.x = x0;
  Eigen::VectorXd fx = f(r.x);
  if (!fx.allFinite()) {
    r.failure = "non-finite F at start";
    r.residual_norm = INFINITY;
    return r;
  }
  r.residual_norm = inf_norm(fx);

  for (int iter = 0;; ++iter) {
    r.iterations = iter;
    if (r.residual_norm < options.residual_tol) {
      r.converged = true;
      return r;
    }
    if (iter == options.max_iterations) {
      r.failure = "iteration limit";
      return r;
    }

    const Eigen::MatrixXd jac = forward_jacobian(f, r.x, fx, options.fd_rel_step);
    if (!jac.allFinite() || !(rcond(jac) > options.singular_rcond)) {
      r.iterations = iter + 1;
      r.failure = "singular jacobian";
      return r;
    }
    const Eigen::VectorXd step = jac.fullPivLu().solve(-fx);

    double t = 1.0;
    Eigen::VectorXd x_new;
    Eigen::VectorXd f_new;
    for (int k = 0; k <= options.max_halvings; ++k) {
      x_new = r.x + t * step;
      f_new = f(x_new);
      if (f_new.allFinite() && inf_norm(f_new) < r.residual_norm) break;
      if (k < options.max_halvings) t *= 0.5;
    }
    if (!f_new.allFinite()) {
      r.iterations = iter + 1;
      r.failure = "non-finite F";
      return r;
    }
    r.x = x_new;
    fx = f_new;
    r.residual_norm = inf_norm(fx);
    if (inf_norm(t * step) < options.step_tol) {
      r.iterations = iter + 1;
      r.converged = true;
      return r;
    }
  }
}

}  // namespace semimed
