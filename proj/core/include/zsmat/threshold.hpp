#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace zsmat {

/// How the cluster split is turned into a score threshold.
enum class ThresholdRule {
  /// Decision boundary of the optimal 2-partition: midway between the largest
  /// low-cluster score and the smallest high-cluster score. Agrees with a
  /// discretized Otsu threshold.
  ClusterBoundary,
  /// Cardinality-weighted mean of the two cluster centroids.
  WeightedCentroid,
};

struct ThresholdConfig {
  double delta = 0.1;     // static offset favouring precision
  double fallback = 0.4;  // used when clustering is impossible
  double floor = 0.05;    // scores below are ignored before clustering
  ThresholdRule rule = ThresholdRule::ClusterBoundary;

  /// Throws ConfigError on out-of-range fields.
  void validate() const;
};

/// Optimal two-cluster split of a 1-D sample; cluster 1 has the lower mean.
struct ClusterResult {
  double mu1 = 0.0;
  double mu2 = 0.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double low_max = 0.0;   // largest score in cluster 1
  double high_min = 0.0;  // smallest score in cluster 2
};

/// Exact 1-D 2-means by scanning every split point of the sorted scores.
///
/// In one dimension the optimal clusters are contiguous in sorted order, so
/// maximizing the between-cluster term n1*n2*(mu1-mu2)^2 over the n-1 splits
/// (only between distinct values) finds the global optimum. Ties go to the
/// lowest split. Throws DegenerateDistribution for fewer than two distinct values.
ClusterResult two_means_1d(std::span<const double> scores);

/// Per-sequence detection threshold, clamped to [0, 1]. Returns cfg.fallback
/// when no score survives the floor or the survivors are degenerate.
/// Throws ValidationError for scores outside [0, 1].
double adaptive_threshold(std::span<const double> scores, const ThresholdConfig& cfg);

/// Same as adaptive_threshold but also reports the clusters; `clustered` is
/// false on the fallback path.
struct ThresholdResult {
  double tau = 0.0;
  bool clustered = false;
  ClusterResult clusters;
  std::size_t admitted = 0;  // scores at or above the floor
};
ThresholdResult compute_threshold(std::span<const double> scores, const ThresholdConfig& cfg);

/// Histogram Otsu threshold over [0, 1] with `bins` equal bins.
///
/// Between-class variance is evaluated at every interior bin boundary; when
/// it is maximal over a run of boundaries (empty bins between the modes) the
/// centre of that run is returned. Throws DegenerateDistribution when all
/// scores fall in one bin, std::invalid_argument when bins < 2.
double otsu_threshold(std::span<const double> scores, int bins);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  int cluster = 0;  // 1 = below the cluster boundary, 2 = above, 0 when unclustered
};

/// Equal-width histogram on [0, 1]; bins are labelled by which side of
/// `boundary` their centre falls (pass a negative boundary for no labels).
std::vector<HistogramBin> score_histogram(std::span<const double> scores, int bins, double boundary);

/// Recomputes the threshold over all scores seen so far. Off by default in
/// the pipeline, which pools a whole sequence before tracking.
class StreamingThreshold {
 public:
  explicit StreamingThreshold(ThresholdConfig cfg) : cfg_(cfg), tau_(cfg.fallback) {}

  /// Adds one frame's scores and returns the updated threshold.
  double update(std::span<const double> frame_scores);
  double current() const { return tau_; }
  std::size_t seen() const { return scores_.size(); }

 private:
  ThresholdConfig cfg_;
  std::vector<double> scores_;
  double tau_;
};

}  // namespace zsmat
