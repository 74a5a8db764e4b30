#pragma once

// Kernel estimate of the error score -f'/f.
//
// A Gaussian-kernel density estimate on reference residuals (Silverman
// bandwidth h = 1.06 * sd * n^{-1/5}) gives score(e) = -f'(e)/f(e). Where the
// density at an evaluation point falls below 1e-3 of its largest value over the
// reference residuals, the score is replaced by the score at the nearest
// reference residual whose density clears that floor. Scores are finally
// clipped to |score| <= 10/h.

#include <optional>
#include <span>
#include <vector>

namespace semimed {

struct ScoreEstimate {
  std::vector<double> eval_points;
  std::vector<double> score_values;
  double bandwidth = 0.0;
  double clip_bound = 0.0;
};

inline constexpr double kDensityFloorRatio = 1e-3;
inline constexpr double kScoreClipTimesBandwidth = 10.0;
inline constexpr std::size_t kMinScoreResiduals = 10;

// 1.06 * sd * n^{-1/5}, sd with divisor n - 1. Throws NumericalError when the
// residuals have zero variance.
double silverman_bandwidth(std::span<const double> residuals);

class KernelScore {
 public:
  explicit KernelScore(std::vector<double> reference,
                       std::optional<double> bandwidth = std::nullopt);

  double bandwidth() const { return h_; }
  double clip_bound() const { return kScoreClipTimesBandwidth / h_; }
  // Largest density over the reference residuals, with every kernel included.
  double max_density() const { return fmax_; }
  const std::vector<double>& reference() const { return ref_; }

  // Scores at the reference residuals themselves, each leaving its own kernel
  // out. Equal to paired(reference()).
  const std::vector<double>& reference_scores() const { return ref_scores_; }

  // Leave-own-out scores: eval[i] is scored against the reference residuals
  // without reference()[i]. Requires eval.size() == reference().size().
  std::vector<double> paired(std::span<const double> eval) const;

  // Ordinary scores at arbitrary points using every reference residual.
  ScoreEstimate evaluate(std::span<const double> eval) const;

 private:
  struct Anchor {
    double at;
    double score;
  };

  double clamp_to_anchor(const std::vector<Anchor>& anchors, double e) const;
  double finish(double mass, double moment, double norm, const std::vector<Anchor>& anchors,
                double e) const;

  std::vector<double> ref_;
  double h_ = 0.0;
  double fmax_ = 0.0;
  std::vector<Anchor> loo_anchors_;   // adequate points under leave-own-out
  std::vector<Anchor> full_anchors_;  // adequate points with all kernels
  std::vector<double> ref_scores_;
};

ScoreEstimate estimate_score(std::span<const double> residuals, std::span<const double> eval_points,
                             std::optional<double> bandwidth = std::nullopt);

}  // namespace semimed
