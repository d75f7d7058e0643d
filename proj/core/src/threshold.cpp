#include "zsmat/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "zsmat/errors.hpp"

namespace zsmat {

void ThresholdConfig::validate() const {
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw ConfigError(fmt::format("delta must lie in [0, 1], got {}", delta));
  }
  if (!(fallback >= 0.0 && fallback <= 1.0)) {
    throw ConfigError(fmt::format("fallback must lie in [0, 1], got {}", fallback));
  }
  if (!(floor >= 0.0 && floor < 1.0)) {
    throw ConfigError(fmt::format("floor must lie in [0, 1), got {}", floor));
  }
}

ClusterResult two_means_1d(std::span<const double> scores) {
  std::vector<double> s(scores.begin(), scores.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  if (n < 2 || s.front() == s.back()) {
    throw DegenerateDistribution("two-cluster split needs at least two distinct scores");
  }

  double total = 0.0;
  for (double v : s) {
    total += v;
  }

  // Between-cluster term avoids the cancellation of sum-of-squares formulas.
  double best = -1.0;
  std::size_t best_k = 0;
  double prefix = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    prefix += s[k - 1];
    if (s[k - 1] == s[k]) {
      continue;
    }
    const double n1 = static_cast<double>(k);
    const double n2 = static_cast<double>(n - k);
    const double m1 = prefix / n1;
    const double m2 = (total - prefix) / n2;
    const double between = n1 * n2 * (m2 - m1) * (m2 - m1);
    if (between > best) {
      best = between;
      best_k = k;
    }
  }

  ClusterResult r;
  r.n1 = best_k;
  r.n2 = n - best_k;
  double low = 0.0;
  for (std::size_t i = 0; i < best_k; ++i) {
    low += s[i];
  }
  double high = 0.0;
  for (std::size_t i = best_k; i < n; ++i) {
    high += s[i];
  }
  r.mu1 = low / static_cast<double>(r.n1);
  r.mu2 = high / static_cast<double>(r.n2);
  r.low_max = s[best_k - 1];
  r.high_min = s[best_k];
  return r;
}

ThresholdResult compute_threshold(std::span<const double> scores, const ThresholdConfig& cfg) {
  cfg.validate();
  std::vector<double> admitted;
  admitted.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double v = scores[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError(fmt::format("score #{} = {} outside [0, 1]", i, v));
    }
    if (v >= cfg.floor) {
      admitted.push_back(v);
    }
  }

  ThresholdResult out;
  out.admitted = admitted.size();
  out.tau = cfg.fallback;
  if (admitted.empty()) {
    return out;
  }
  try {
    out.clusters = two_means_1d(admitted);
  } catch (const DegenerateDistribution&) {
    return out;
  }
  out.clustered = true;

  const ClusterResult& c = out.clusters;
  double base = 0.0;
  switch (cfg.rule) {
    case ThresholdRule::ClusterBoundary:
      base = 0.5 * (c.low_max + c.high_min);
      break;
    case ThresholdRule::WeightedCentroid: {
      const double n1 = static_cast<double>(c.n1);
      const double n2 = static_cast<double>(c.n2);
      base = (n1 * c.mu1 + n2 * c.mu2) / (n1 + n2);
      break;
    }
  }
  out.tau = std::clamp(base + cfg.delta, 0.0, 1.0);
  return out;
}

double adaptive_threshold(std::span<const double> scores, const ThresholdConfig& cfg) {
  return compute_threshold(scores, cfg).tau;
}

double otsu_threshold(std::span<const double> scores, int bins) {
  if (bins < 2) {
    throw std::invalid_argument(fmt::format("otsu_threshold needs at least 2 bins, got {}", bins));
  }
  std::vector<double> hist(static_cast<std::size_t>(bins), 0.0);
  for (double v : scores) {
    const int b = std::clamp(static_cast<int>(std::floor(v * bins)), 0, bins - 1);
    hist[static_cast<std::size_t>(b)] += 1.0;
  }
  const int occupied = static_cast<int>(std::count_if(hist.begin(), hist.end(), [](double c) { return c > 0.0; }));
  if (occupied < 2) {
    throw DegenerateDistribution("otsu_threshold needs scores in at least two histogram bins");
  }

  double total_n = 0.0;
  double total_sum = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double center = (b + 0.5) / bins;
    total_n += hist[static_cast<std::size_t>(b)];
    total_sum += hist[static_cast<std::size_t>(b)] * center;
  }

  // Boundary t separates bins [0, t) from [t, bins).
  std::vector<double> between(static_cast<std::size_t>(bins), -1.0);
  double w1 = 0.0;
  double s1 = 0.0;
  double best = -1.0;
  for (int t = 1; t < bins; ++t) {
    const double center = (t - 0.5) / bins;
    w1 += hist[static_cast<std::size_t>(t - 1)];
    s1 += hist[static_cast<std::size_t>(t - 1)] * center;
    const double w2 = total_n - w1;
    if (w1 == 0.0 || w2 == 0.0) {
      continue;
    }
    const double m1 = s1 / w1;
    const double m2 = (total_sum - s1) / w2;
    between[static_cast<std::size_t>(t)] = w1 * w2 * (m1 - m2) * (m1 - m2);
    best = std::max(best, between[static_cast<std::size_t>(t)]);
  }

  const double tol = best * 1e-12;
  int first = 1;
  while (first < bins && between[static_cast<std::size_t>(first)] < best - tol) {
    ++first;
  }
  int last = first;
  while (last + 1 < bins && between[static_cast<std::size_t>(last + 1)] >= best - tol) {
    ++last;
  }
  return 0.5 * (first + last) / bins;
}

std::vector<HistogramBin> score_histogram(std::span<const double> scores, int bins, double boundary) {
  if (bins < 1) {
    throw std::invalid_argument("score_histogram needs at least one bin");
  }
  std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    auto& bin = out[static_cast<std::size_t>(b)];
    bin.lo = static_cast<double>(b) / bins;
    bin.hi = static_cast<double>(b + 1) / bins;
    if (boundary >= 0.0) {
      bin.cluster = 0.5 * (bin.lo + bin.hi) < boundary ? 1 : 2;
    }
  }
  for (double v : scores) {
    const int b = std::clamp(static_cast<int>(std::floor(v * bins)), 0, bins - 1);
    ++out[static_cast<std::size_t>(b)].count;
  }
  return out;
}

double StreamingThreshold::update(std::span<const double> frame_scores) {
  scores_.insert(scores_.end(), frame_scores.begin(), frame_scores.end());
  tau_ = adaptive_threshold(scores_, cfg_);
  return tau_;
}

}  // namespace zsmat
