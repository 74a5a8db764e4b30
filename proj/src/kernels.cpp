#include "semimed/kernels.hpp"

#include "semimed/core.hpp"

#include <omp.h>

#include <cmath>
#include <cstddef>

namespace semimed::kernels {

namespace {

void check(std::span<const double> eval, std::span<const double> reference, bool leave_own_out,
           std::span<double> mass, std::span<double> moment) {
  if (mass.size() != eval.size() || moment.size() != eval.size()) {
    throw DataError("kernel sums: output size mismatch");
  }
  if (leave_own_out && eval.size() != reference.size()) {
    throw DataError("kernel sums: leave-own-out needs paired eval/reference");
  }
}

// One evaluation point. Shared by both drivers so they agree bit for bit.
inline void point_sums(double e, std::span<const double> reference, double inv_h,
                       std::ptrdiff_t skip, double& mass, double& moment) {
  double m = 0.0;
  double mo = 0.0;
  const auto nref = static_cast<std::ptrdiff_t>(reference.size());
  for (std::ptrdiff_t k = 0; k < nref; ++k) {
    if (k == skip) continue;
    const double u = (e - reference[static_cast<std::size_t>(k)]) * inv_h;
    const double w = std::exp(-0.5 * u * u);
    m += w;
    mo += u * w;
  }
  mass = m;
  moment = mo;
}

// Below this many kernel evaluations the thread fork costs more than it saves.
constexpr double kParallelWork = 2.0e5;

}  // namespace

void gaussian_kernel_sums_serial(std::span<const double> eval, std::span<const double> reference,
                                 double bandwidth, bool leave_own_out, std::span<double> mass,
                                 std::span<double> moment) {
  check(eval, reference, leave_own_out, mass, moment);
  const double inv_h = 1.0 / bandwidth;
  for (std::size_t i = 0; i < eval.size(); ++i) {
    const std::ptrdiff_t skip = leave_own_out ? static_cast<std::ptrdiff_t>(i) : -1;
    point_sums(eval[i], reference, inv_h, skip, mass[i], moment[i]);
  }
}

void gaussian_kernel_sums(std::span<const double> eval, std::span<const double> reference,
                          double bandwidth, bool leave_own_out, std::span<double> mass,
                          std::span<double> moment) {
  check(eval, reference, leave_own_out, mass, moment);
  const double inv_h = 1.0 / bandwidth;
  const auto n = static_cast<std::ptrdiff_t>(eval.size());
  const bool go_parallel = static_cast<double>(eval.size()) * static_cast<double>(reference.size()) >=
                               kParallelWork &&
                           !omp_in_parallel();
#pragma omp parallel for schedule(static) if (go_parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t skip = leave_own_out ? i : -1;
    const auto idx = static_cast<std::size_t>(i);
    point_sums(eval[idx], reference, inv_h, skip, mass[idx], moment[idx]);
  }
}

}  // namespace semimed::kernels
