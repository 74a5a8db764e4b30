#include "semimed/linalg.hpp"
#include "semimed/newton.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace semimed;

namespace {
Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}
}  // namespace

TEST_CASE("affine root in one step") {
  const auto r = newton_root([](const Eigen::VectorXd& x) { return Eigen::VectorXd(x.array() - 3.0); }, vec({0.0}));
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK(std::abs(r.x[0] - 3.0) < 1e-9);
}

TEST_CASE("two-dimensional closed form root") {
  const auto r = newton_root(
      [](const Eigen::VectorXd& x) { return vec({x[0] * x[0] - 4.0, x[1] - 1.0}); }, vec({1.0, 0.0}));
  REQUIRE(r.converged);
  CHECK(r.x[0] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(r.residual_norm < 1e-8);
}

TEST_CASE("constant F has a singular jacobian") {
  const auto r = newton_root([](const Eigen::VectorXd&) { return vec({1.0}); }, vec({0.0}));
  CHECK_FALSE(r.converged);
  CHECK(r.failure == "singular jacobian");
}

TEST_CASE("no real root runs out of iterations") {
  const auto r = newton_root([](const Eigen::VectorXd& x) { return vec({x[0] * x[0] + 1.0}); }, vec({0.5}));
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 200);
  CHECK(r.failure == "iteration limit");
}

TEST_CASE("non-finite F fails") {
  const auto at_start = newton_root([](const Eigen::VectorXd&) { return vec({NAN}); }, vec({0.0}));
  CHECK_FALSE(at_start.converged);
  // finite at x0 but NaN everywhere a step can reach
  const auto later = newton_root(
      [](const Eigen::VectorXd& x) { return vec({x[0] == 1.0 ? 1.0 : (x[0] > 1.0 ? 2.0 * x[0] - 1.0 : NAN)}); },
      vec({1.0}));
  CHECK_FALSE(later.converged);
}

TEST_CASE("already at a root") {
  const auto r = newton_root([](const Eigen::VectorXd& x) { return Eigen::VectorXd(x); }, vec({0.0, 0.0}));
  CHECK(r.converged);
  CHECK(r.iterations == 0);
}

TEST_CASE("central jacobian and sandwich helpers") {
  const VectorMap f = [](const Eigen::VectorXd& x) {
    return vec({std::sin(x[0]) * x[1], x[0] * x[0] + std::exp(x[1])});
  };
  const auto x = vec({0.3, -0.7});
  const auto J = central_jacobian(f, x);
  const auto ref = oracle::central_diff(f, x, 1e-6);
  CHECK((J - ref).cwiseAbs().maxCoeff() < 1e-7);

  const Eigen::MatrixXd A = -Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(3, 3);
  CHECK(sandwich_cov(A, B, 1).isApprox(Eigen::MatrixXd::Identity(3, 3)));
  CHECK_THROWS(sandwich_cov(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 2), 5));

  CHECK(rcond(Eigen::MatrixXd::Identity(4, 4)) == doctest::Approx(1.0));
  CHECK(two_sided_p(1.959963985) == doctest::Approx(0.05).epsilon(1e-8));
}
