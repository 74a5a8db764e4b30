#pragma once

// Gaussian kernel sums behind the score estimate. For every evaluation point e_i
// the kernels accumulate, over reference points r_k,
//
//   mass_i   = sum_k phi(u_ik),         u_ik = (e_i - r_k) / h,
//   moment_i = sum_k u_ik * phi(u_ik),
//
// with phi the unnormalised kernel exp(-u^2/2). With `leave_own_out` set the
// pair k == i is skipped (eval and reference must then have equal length).
//
// gaussian_kernel_sums_serial is the reference implementation. The OpenMP
// version splits the evaluation points across threads; each point is summed in
// the same order, so results are bitwise identical for any thread count.

#include <span>

namespace semimed::kernels {

void gaussian_kernel_sums_serial(std::span<const double> eval, std::span<const double> reference,
                                 double bandwidth, bool leave_own_out, std::span<double> mass,
                                 std::span<double> moment);

void gaussian_kernel_sums(std::span<const double> eval, std::span<const double> reference,
                          double bandwidth, bool leave_own_out, std::span<double> mass,
                          std::span<double> moment);

}  // namespace semimed::kernels
