#include "grec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "grec/error.hpp"
#include "grec/parallel.hpp"

namespace grec {

double iou(const BoxF& a, const BoxF& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

namespace {

// Hungarian algorithm (potentials form) on an n x m cost matrix, n <= m
// after padding; minimizes total cost. Returns assignment row -> column.
std::vector<int> hungarian_min(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const int m = n == 0 ? 0 : static_cast<int>(cost[0].size());
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, std::numeric_limits<double>::infinity());
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = std::numeric_limits<double>::infinity();
      int j1 = -1;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

MatchCounts match_sample(const std::vector<BoxF>& pred, const std::vector<BoxF>& gt,
                         double threshold) {
  MatchCounts c;
  const int np = static_cast<int>(pred.size());
  const int ng = static_cast<int>(gt.size());
  if (np == 0 || ng == 0) {
    c.fp = np;
    c.fn = ng;
    return c;
  }
  // Pair value: a large constant per admissible match plus its IoU, so the
  // assignment maximizes match count first and total IoU second. Padded to a
  // square matrix of zero-value cells; minimized as negated values.
  const int n = std::max(np, ng);
  const double kMatchWeight = 1e6;
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < np; ++i) {
    for (int j = 0; j < ng; ++j) {
      const double v = iou(pred[static_cast<std::size_t>(i)], gt[static_cast<std::size_t>(j)]);
      if (v >= threshold) cost[i][j] = -(kMatchWeight + v);
    }
  }
  const auto assignment = hungarian_min(cost);
  int tp = 0;
  for (int i = 0; i < np; ++i) {
    const int j = assignment[static_cast<std::size_t>(i)];
    if (j >= 0 && j < ng && cost[i][j] < 0.0) ++tp;
  }
  c.tp = tp;
  c.fp = np - tp;
  c.fn = ng - tp;
  return c;
}

double f1_from_counts(int tp, int fp, int fn) {
  if (tp == 0 && fp == 0 && fn == 0) return 1.0;  // empty vs empty
  const double denom = 2.0 * tp + fp + fn;
  if (denom == 0.0) return 0.0;
  return 2.0 * tp / denom;
}

EvalReport evaluate(const std::vector<PredictionSet>& preds,
                    const std::vector<TrainingSample>& dataset, EvalSetting setting,
                    double threshold, int jobs) {
  std::map<std::string, const PredictionSet*> by_id;
  for (const auto& p : preds) {
    if (!by_id.emplace(p.sample_id, &p).second)
      throw DuplicatePrediction("duplicate prediction for sample " + p.sample_id);
  }
  std::set<std::string> dataset_ids;
  for (const auto& s : dataset) dataset_ids.insert(s.sample_id);
  for (const auto& s : dataset) {
    if (by_id.find(s.sample_id) == by_id.end())
      throw MissingPrediction("no prediction for sample " + s.sample_id);
  }
  for (const auto& [id, p] : by_id) {
    if (dataset_ids.find(id) == dataset_ids.end())
      throw MissingPrediction("prediction for unknown sample " + id);
  }

  std::vector<const TrainingSample*> ordered;
  for (const auto& s : dataset) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const TrainingSample* a, const TrainingSample* b) {
              return a->sample_id < b->sample_id;
            });

  EvalReport report;
  report.setting = setting;
  report.n_samples = static_cast<int>(ordered.size());
  report.per_sample.resize(ordered.size());
  parallel_for(ordered.size(), jobs, [&](std::size_t i) {
    const TrainingSample& s = *ordered[i];
    std::vector<BoxF> gt;
    for (const auto& t : s.targets) gt.push_back(to_boxf(t.bbox));
    const PredictionSet& p = *by_id.at(s.sample_id);
    SampleScore score;
    score.sample_id = s.sample_id;
    score.counts = match_sample(p.boxes, gt, threshold);
    score.f1 = f1_from_counts(score.counts.tp, score.counts.fp, score.counts.fn);
    report.per_sample[i] = score;
  });

  double sum = 0.0;
  int perfect = 0;
  for (const auto& s : report.per_sample) {
    sum += s.f1;
    if (s.f1 == 1.0) ++perfect;
  }
  report.mean_f1 = report.per_sample.empty() ? 0.0 : sum / report.per_sample.size();
  report.precision_at_f1_1 =
      report.per_sample.empty() ? 0.0 : static_cast<double>(perfect) / report.per_sample.size();
  return report;
}

}  // namespace grec
