#include "semimed/score.hpp"

#include "semimed/core.hpp"
#include "semimed/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace semimed {

namespace {
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
}

double silverman_bandwidth(std::span<const double> residuals) {
  const auto n = static_cast<double>(residuals.size());
  if (residuals.size() < 2) throw NumericalError("bandwidth: fewer than two residuals");
  double mean = 0.0;
  for (double e : residuals) mean += e;
  mean /= n;
  double ss = 0.0;
  for (double e : residuals) ss += (e - mean) * (e - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double h = 1.06 * sd * std::pow(n, -0.2);
  if (!(h > 0.0) || !std::isfinite(h)) throw NumericalError("bandwidth: zero-variance residuals");
  return h;
}

KernelScore::KernelScore(std::vector<double> reference, std::optional<double> bandwidth)
    : ref_(std::move(reference)) {
  if (ref_.size() < kMinScoreResiduals) {
    throw DataError("score estimate needs at least " + std::to_string(kMinScoreResiduals) +
                    " residuals");
  }
  for (double e : ref_) {
    if (!std::isfinite(e)) throw NumericalError("score estimate: non-finite residual");
  }
  h_ = bandwidth ? *bandwidth : silverman_bandwidth(ref_);
  if (!(h_ > 0.0) || !std::isfinite(h_)) throw NumericalError("score estimate: bad bandwidth");

  const std::size_t n = ref_.size();
  std::vector<double> mass(n), moment(n);
  kernels::gaussian_kernel_sums(ref_, ref_, h_, true, mass, moment);

  // Own kernel contributes phi(0) = 1 to the mass and 0 to the moment.
  const double full_norm = kInvSqrt2Pi / (static_cast<double>(n) * h_);
  const double loo_norm = kInvSqrt2Pi / (static_cast<double>(n - 1) * h_);
  fmax_ = 0.0;
  for (std::size_t k = 0; k < n; ++k) fmax_ = std::max(fmax_, (mass[k] + 1.0) * full_norm);
  const double floor = kDensityFloorRatio * fmax_;

  for (std::size_t k = 0; k < n; ++k) {
    if (mass[k] * loo_norm >= floor && mass[k] > 0.0) {
      loo_anchors_.push_back({ref_[k], moment[k] / (mass[k] * h_)});
    }
    if ((mass[k] + 1.0) * full_norm >= floor) {
      full_anchors_.push_back({ref_[k], moment[k] / ((mass[k] + 1.0) * h_)});
    }
  }
  if (loo_anchors_.empty()) throw NumericalError("score estimate: no residual with adequate density");
  auto by_position = [](const Anchor& a, const Anchor& b) {
    return a.at < b.at || (a.at == b.at && a.score < b.score);
  };
  std::sort(loo_anchors_.begin(), loo_anchors_.end(), by_position);
  std::sort(full_anchors_.begin(), full_anchors_.end(), by_position);

  ref_scores_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    ref_scores_[k] = finish(mass[k], moment[k], loo_norm, loo_anchors_, ref_[k]);
  }
}

double KernelScore::clamp_to_anchor(const std::vector<Anchor>& anchors, double e) const {
  auto it = std::lower_bound(anchors.begin(), anchors.end(), e,
                             [](const Anchor& a, double v) { return a.at < v; });
  if (it == anchors.end()) return anchors.back().score;
  if (it == anchors.begin()) return it->score;
  const auto prev = std::prev(it);
  return (e - prev->at <= it->at - e) ? prev->score : it->score;
}

double KernelScore::finish(double mass, double moment, double norm,
                           const std::vector<Anchor>& anchors, double e) const {
  double s;
  if (mass > 0.0 && mass * norm >= kDensityFloorRatio * fmax_) {
    s = moment / (mass * h_);
  } else {
    s = clamp_to_anchor(anchors, e);
  }
  const double bound = clip_bound();
  return std::clamp(s, -bound, bound);
}

std::vector<double> KernelScore::paired(std::span<const double> eval) const {
  const std::size_t n = ref_.size();
  if (eval.size() != n) throw DataError("paired score: eval/reference length mismatch");
  std::vector<double> mass(n), moment(n), out(n);
  kernels::gaussian_kernel_sums(eval, ref_, h_, true, mass, moment);
  const double loo_norm = kInvSqrt2Pi / (static_cast<double>(n - 1) * h_);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = finish(mass[i], moment[i], loo_norm, loo_anchors_, eval[i]);
  }
  return out;
}

ScoreEstimate KernelScore::evaluate(std::span<const double> eval) const {
  const std::size_t m = eval.size();
  std::vector<double> mass(m), moment(m);
  kernels::gaussian_kernel_sums(eval, ref_, h_, false, mass, moment);
  const double full_norm = kInvSqrt2Pi / (static_cast<double>(ref_.size()) * h_);
  ScoreEstimate out;
  out.eval_points.assign(eval.begin(), eval.end());
  out.score_values.resize(m);
  out.bandwidth = h_;
  out.clip_bound = clip_bound();
  for (std::size_t i = 0; i < m; ++i) {
    out.score_values[i] = finish(mass[i], moment[i], full_norm, full_anchors_, eval[i]);
  }
  return out;
}

ScoreEstimate estimate_score(std::span<const double> residuals, std::span<const double> eval_points,
                             std::optional<double> bandwidth) {
  KernelScore ks(std::vector<double>(residuals.begin(), residuals.end()), bandwidth);
  return ks.evaluate(eval_points);
}

}  // namespace semimed
