#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>

namespace semimed {

// Smallest over largest singular value; 0 for an empty or all-zero matrix.
double rcond(const Eigen::MatrixXd& m);

using VectorMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Central-difference Jacobian with step rel_step * max(1, |x_j|).
Eigen::MatrixXd central_jacobian(const VectorMap& f, const Eigen::VectorXd& x,
                                 double rel_step = 1e-5);

// A^{-1} B A^{-T} / n, symmetrised. Throws NumericalError when A is singular
// (rcond <= rcond_min).
Eigen::MatrixXd sandwich_cov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, std::size_t n,
                             double rcond_min = 1e-10);

// Mean of the rows' outer products, (1/n) Psi^T Psi.
Eigen::MatrixXd outer_product_mean(const Eigen::MatrixXd& psi);

// Two-sided normal p-value for a Wald statistic.
double two_sided_p(double z);

}  // namespace semimed
