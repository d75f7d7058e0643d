#include "zsmat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <fmt/format.h>

#include "zsmat/association.hpp"
#include "zsmat/errors.hpp"

namespace zsmat {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double ratio(double num, double den) { return num / std::max(1.0, den); }

struct Frame {
  std::vector<int> gt;    // dense gt ids
  std::vector<int> pred;  // dense pred ids
  std::vector<BBox> gt_boxes;
  std::vector<BBox> pred_boxes;
};

void check_table(const TrackTable& table, const char* what) {
  std::set<std::pair<int, int>> seen;
  for (const auto& r : table) {
    if (!r.box.is_valid()) {
      throw ValidationError(fmt::format("{}: invalid box for id {} in frame {}", what, r.id, r.frame));
    }
    if (!seen.emplace(r.frame, r.id).second) {
      throw ValidationError(fmt::format("{}: id {} appears twice in frame {}", what, r.id, r.frame));
    }
  }
}

// Maximum-score assignment; returns (row, col) pairs.
std::vector<std::pair<std::size_t, std::size_t>> max_assignment(const ScoreMatrix& score) {
  ScoreMatrix cost(score.rows(), score.cols());
  for (std::size_t r = 0; r < score.rows(); ++r) {
    for (std::size_t c = 0; c < score.cols(); ++c) {
      cost(r, c) = -score(r, c);
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const auto cols = solve_min_cost(cost);
  for (std::size_t r = 0; r < cols.size(); ++r) {
    if (cols[r] >= 0) {
      pairs.emplace_back(r, static_cast<std::size_t>(cols[r]));
    }
  }
  return pairs;
}

}  // namespace

double AlphaCounts::deta() const { return ratio(tp, tp + fn + fp); }
double AlphaCounts::assa() const { return ratio(assa_sum, tp); }
double AlphaCounts::hota() const { return std::sqrt(deta() * assa()); }
double AlphaCounts::detre() const { return ratio(tp, tp + fn); }
double AlphaCounts::detpr() const { return ratio(tp, tp + fp); }
double AlphaCounts::loca() const { return std::max(1e-10, loca_sum) / std::max(1e-10, static_cast<double>(tp)); }

void SequenceEval::finalize() {
  hota = deta = assa = detre = detpr = loca = 0.0;
  if (!per_alpha.empty()) {
    for (const auto& a : per_alpha) {
      hota += a.hota();
      deta += a.deta();
      assa += a.assa();
      detre += a.detre();
      detpr += a.detpr();
      loca += a.loca();
    }
    const double n = static_cast<double>(per_alpha.size());
    hota /= n;
    deta /= n;
    assa /= n;
    detre /= n;
    detpr /= n;
    loca /= n;
  }
  mota = static_cast<double>(clr_tp - clr_fp - idsw) / std::max(1.0, static_cast<double>(clr_tp + clr_fn));
  idf1 = static_cast<double>(idtp) / std::max(1.0, idtp + 0.5 * idfn + 0.5 * idfp);
}

std::vector<double> default_alphas() {
  std::vector<double> a;
  for (int i = 1; i <= 19; ++i) {
    a.push_back(0.05 * i);
  }
  return a;
}

SequenceEval evaluate(const TrackTable& gt, const TrackTable& pred) {
  const auto alphas = default_alphas();
  return evaluate(gt, pred, alphas);
}

SequenceEval evaluate(const TrackTable& gt, const TrackTable& pred, std::span<const double> alphas) {
  check_table(gt, "ground truth");
  check_table(pred, "prediction");

  std::map<int, int> gt_index;
  std::map<int, int> pred_index;
  for (const auto& r : gt) gt_index.emplace(r.id, 0);
  for (const auto& r : pred) pred_index.emplace(r.id, 0);
  int k = 0;
  for (auto& [id, idx] : gt_index) idx = k++;
  k = 0;
  for (auto& [id, idx] : pred_index) idx = k++;
  const std::size_t ng = gt_index.size();
  const std::size_t np = pred_index.size();

  std::map<int, Frame> frames;
  for (const auto& r : gt) {
    auto& f = frames[r.frame];
    f.gt.push_back(gt_index[r.id]);
    f.gt_boxes.push_back(r.box);
  }
  for (const auto& r : pred) {
    auto& f = frames[r.frame];
    f.pred.push_back(pred_index[r.id]);
    f.pred_boxes.push_back(r.box);
  }

  SequenceEval ev;
  ev.gt_dets = static_cast<long>(gt.size());
  ev.pred_dets = static_cast<long>(pred.size());
  for (double a : alphas) {
    ev.per_alpha.push_back(AlphaCounts{a});
  }

  // Per-frame similarity matrices.
  std::vector<ScoreMatrix> sims;
  for (const auto& [fi, f] : frames) {
    ScoreMatrix s(f.gt.size(), f.pred.size());
    for (std::size_t g = 0; g < f.gt.size(); ++g) {
      for (std::size_t p = 0; p < f.pred.size(); ++p) {
        s(g, p) = iou(f.gt_boxes[g], f.pred_boxes[p]);
      }
    }
    sims.push_back(std::move(s));
  }

  // Global alignment between id pairs.
  std::vector<double> potential(ng * np, 0.0);
  std::vector<double> gt_count(ng, 0.0);
  std::vector<double> pred_count(np, 0.0);
  std::size_t fi = 0;
  for (const auto& [id, f] : frames) {
    const auto& s = sims[fi++];
    std::vector<double> row_sum(f.gt.size(), 0.0);
    std::vector<double> col_sum(f.pred.size(), 0.0);
    for (std::size_t g = 0; g < f.gt.size(); ++g) {
      for (std::size_t p = 0; p < f.pred.size(); ++p) {
        row_sum[g] += s(g, p);
        col_sum[p] += s(g, p);
      }
    }
    for (std::size_t g = 0; g < f.gt.size(); ++g) {
      for (std::size_t p = 0; p < f.pred.size(); ++p) {
        const double denom = row_sum[g] + col_sum[p] - s(g, p);
        if (denom > kEps) {
          potential[static_cast<std::size_t>(f.gt[g]) * np + static_cast<std::size_t>(f.pred[p])] += s(g, p) / denom;
        }
      }
    }
    for (int g : f.gt) gt_count[static_cast<std::size_t>(g)] += 1.0;
    for (int p : f.pred) pred_count[static_cast<std::size_t>(p)] += 1.0;
  }
  std::vector<double> alignment(ng * np, 0.0);
  for (std::size_t g = 0; g < ng; ++g) {
    for (std::size_t p = 0; p < np; ++p) {
      const double m = potential[g * np + p];
      alignment[g * np + p] = m / (gt_count[g] + pred_count[p] - m);
    }
  }

  // HOTA matching per frame.
  std::vector<std::vector<double>> matches(alphas.size(), std::vector<double>(ng * np, 0.0));
  fi = 0;
  for (const auto& [id, f] : frames) {
    const auto& s = sims[fi++];
    for (auto& a : ev.per_alpha) {
      a.fn += static_cast<long>(f.gt.size());
      a.fp += static_cast<long>(f.pred.size());
    }
    if (f.gt.empty() || f.pred.empty()) {
      continue;
    }
    ScoreMatrix score(f.gt.size(), f.pred.size());
    for (std::size_t g = 0; g < f.gt.size(); ++g) {
      for (std::size_t p = 0; p < f.pred.size(); ++p) {
        score(g, p) = alignment[static_cast<std::size_t>(f.gt[g]) * np + static_cast<std::size_t>(f.pred[p])] * s(g, p);
      }
    }
    const auto pairs = max_assignment(score);
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
      auto& a = ev.per_alpha[ai];
      for (const auto& [g, p] : pairs) {
        if (s(g, p) >= alphas[ai] - kEps) {
          ++a.tp;
          --a.fn;
          --a.fp;
          a.loca_sum += s(g, p);
          matches[ai][static_cast<std::size_t>(f.gt[g]) * np + static_cast<std::size_t>(f.pred[p])] += 1.0;
        }
      }
    }
  }
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    double sum = 0.0;
    for (std::size_t g = 0; g < ng; ++g) {
      for (std::size_t p = 0; p < np; ++p) {
        const double m = matches[ai][g * np + p];
        if (m > 0.0) {
          sum += m * m / (gt_count[g] + pred_count[p] - m);
        }
      }
    }
    ev.per_alpha[ai].assa_sum = sum;
  }

  // CLEAR at IoU 0.5 with the continuation bonus.
  constexpr double kClearThreshold = 0.5;
  std::vector<int> prev_any(ng, -1);
  std::vector<int> prev_step(ng, -1);
  fi = 0;
  for (const auto& [id, f] : frames) {
    const auto& s = sims[fi++];
    std::vector<int> step(ng, -1);
    long tp = 0;
    if (!f.gt.empty() && !f.pred.empty()) {
      ScoreMatrix score(f.gt.size(), f.pred.size());
      for (std::size_t g = 0; g < f.gt.size(); ++g) {
        for (std::size_t p = 0; p < f.pred.size(); ++p) {
          const bool cont = prev_step[static_cast<std::size_t>(f.gt[g])] == f.pred[p];
          score(g, p) = s(g, p) < kClearThreshold - kEps ? 0.0 : 1000.0 * cont + s(g, p);
        }
      }
      for (const auto& [g, p] : max_assignment(score)) {
        if (score(g, p) > kEps) {
          const auto gi = static_cast<std::size_t>(f.gt[g]);
          if (prev_any[gi] >= 0 && prev_any[gi] != f.pred[p]) {
            ++ev.idsw;
          }
          prev_any[gi] = f.pred[p];
          step[gi] = f.pred[p];
          ++tp;
        }
      }
    }
    prev_step = std::move(step);
    ev.clr_tp += tp;
    ev.clr_fn += static_cast<long>(f.gt.size()) - tp;
    ev.clr_fp += static_cast<long>(f.pred.size()) - tp;
  }

  // Identity: one global id correspondence maximizing IDTP.
  if (ng > 0 && np > 0) {
    ScoreMatrix counts(ng, np);
    fi = 0;
    for (const auto& [id, f] : frames) {
      const auto& s = sims[fi++];
      for (std::size_t g = 0; g < f.gt.size(); ++g) {
        for (std::size_t p = 0; p < f.pred.size(); ++p) {
          if (s(g, p) >= kClearThreshold - kEps) {
            counts(static_cast<std::size_t>(f.gt[g]), static_cast<std::size_t>(f.pred[p])) += 1.0;
          }
        }
      }
    }
    for (const auto& [g, p] : max_assignment(counts)) {
      ev.idtp += static_cast<long>(counts(g, p));
    }
  }
  ev.idfn = ev.gt_dets - ev.idtp;
  ev.idfp = ev.pred_dets - ev.idtp;

  ev.finalize();
  return ev;
}

SequenceEval aggregate(std::span<const SequenceEval> sequences) {
  SequenceEval out;
  if (sequences.empty()) {
    out.finalize();
    return out;
  }
  out.per_alpha = sequences.front().per_alpha;
  for (auto& a : out.per_alpha) {
    a = AlphaCounts{a.alpha};
  }
  for (const auto& s : sequences) {
    if (s.per_alpha.size() != out.per_alpha.size()) {
      throw std::invalid_argument("aggregate: sequences use different alpha grids");
    }
    for (std::size_t i = 0; i < s.per_alpha.size(); ++i) {
      auto& a = out.per_alpha[i];
      const auto& b = s.per_alpha[i];
      a.tp += b.tp;
      a.fn += b.fn;
      a.fp += b.fp;
      a.assa_sum += b.assa_sum;
      a.loca_sum += b.loca_sum;
    }
    out.gt_dets += s.gt_dets;
    out.pred_dets += s.pred_dets;
    out.clr_tp += s.clr_tp;
    out.clr_fn += s.clr_fn;
    out.clr_fp += s.clr_fp;
    out.idsw += s.idsw;
    out.idtp += s.idtp;
    out.idfn += s.idfn;
    out.idfp += s.idfp;
  }
  out.finalize();
  return out;
}

}  // namespace zsmat
