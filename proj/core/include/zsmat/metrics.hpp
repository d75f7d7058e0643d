#pragma once

#include <span>
#include <vector>

#include "zsmat/track_table.hpp"

namespace zsmat {

/// HOTA counts at one localization threshold.
struct AlphaCounts {
  double alpha = 0.0;
  long tp = 0;
  long fn = 0;
  long fp = 0;
  double assa_sum = 0.0;  // sum over TPs of the association score of their id pair
  double loca_sum = 0.0;  // sum of TP IoUs

  double deta() const;
  double assa() const;
  double hota() const;
  double detre() const;
  double detpr() const;
  double loca() const;
};

struct SequenceEval {
  double hota = 0.0;
  double deta = 0.0;
  double assa = 0.0;
  double detre = 0.0;
  double detpr = 0.0;
  double loca = 0.0;
  double mota = 0.0;  // may be negative
  double idf1 = 0.0;
  long idsw = 0;

  std::vector<AlphaCounts> per_alpha;
  long gt_dets = 0;
  long pred_dets = 0;
  long clr_tp = 0;
  long clr_fn = 0;
  long clr_fp = 0;
  long idtp = 0;
  long idfn = 0;
  long idfp = 0;

  /// Recomputes the scalar metrics from the counts.
  void finalize();
};

/// TrackEval's grid 0.05, 0.10, ..., 0.95.
std::vector<double> default_alphas();

/// Box-IoU HOTA, CLEAR (MOTA, IDSW at IoU 0.5) and identity (IDF1 at 0.5)
/// metrics. Throws ValidationError for repeated ids within a frame or invalid boxes.
SequenceEval evaluate(const TrackTable& gt, const TrackTable& pred, std::span<const double> alphas);
SequenceEval evaluate(const TrackTable& gt, const TrackTable& pred);

/// Pools counts over sequences before forming ratios; AssA and LocA are
/// TP-weighted. Every input must use the same alpha grid.
SequenceEval aggregate(std::span<const SequenceEval> sequences);

}  // namespace zsmat
