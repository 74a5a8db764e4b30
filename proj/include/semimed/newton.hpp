#pragma once

#include "semimed/linalg.hpp"

#include <Eigen/Dense>

#include <string>

namespace semimed {

struct NewtonOptions {
  int max_iterations = 200;
  int max_halvings = 10;
  double residual_tol = 1e-8;  // on ||F||_inf; callers pass F as a sample mean
  double step_tol = 1e-10;     // on ||step||_inf
  double fd_rel_step = 1e-6;   // forward-difference step, times max(1, |x_j|)
  double singular_rcond = 1e-14;
};

struct NewtonResult {
  Eigen::VectorXd x;
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;
  std::string failure;  // empty on success
};

// Damped Newton iteration with a forward-difference Jacobian. Each step is
// halved up to max_halvings times until ||F||_inf decreases; if no halving
// helps, the smallest trial step is taken anyway. A numerically singular
// Jacobian or a non-finite F ends the run as a failure.
NewtonResult newton_root(const VectorMap& f, const Eigen::VectorXd& x0,
                         const NewtonOptions& options = {});

}  // namespace semimed
