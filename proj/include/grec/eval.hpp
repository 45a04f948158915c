#pragma once

#include <map>
#include <string>
#include <vector>

#include "grec/render.hpp"
#include "grec/sample.hpp"

namespace grec {

// Continuous [x, y, w, h] box as ingested from prediction files; annotation
// boxes convert losslessly.
struct BoxF {
  double x = 0, y = 0, w = 0, h = 0;
};

inline BoxF to_boxf(const PixelBBox& b) {
  return {static_cast<double>(b.x), static_cast<double>(b.y), static_cast<double>(b.w),
          static_cast<double>(b.h)};
}

struct PredictionSet {
  std::string sample_id;
  std::vector<BoxF> boxes;  // possibly empty (no-target prediction)
};

struct MatchCounts {
  int tp = 0, fp = 0, fn = 0;
};

enum class EvalSetting { FullDialogue, MentionOnly };

inline const char* eval_setting_name(EvalSetting s) {
  return s == EvalSetting::FullDialogue ? "full-dialogue" : "mention-only";
}

struct SampleScore {
  std::string sample_id;
  MatchCounts counts;
  double f1 = 0.0;
};

struct EvalReport {
  std::vector<SampleScore> per_sample;  // ordered by sample_id
  double mean_f1 = 0.0;
  double precision_at_f1_1 = 0.0;  // fraction of samples with f1 == 1 exactly
  EvalSetting setting = EvalSetting::FullDialogue;
  int n_samples = 0;
};

double iou(const BoxF& a, const BoxF& b);

// One-to-one matching maximizing the number of pairs with IoU >= threshold,
// ties broken toward larger total IoU (optimal assignment, not greedy).
MatchCounts match_sample(const std::vector<BoxF>& pred, const std::vector<BoxF>& gt,
                         double threshold = 0.5);

// 2TP / (2TP + FP + FN); all-zero counts mean the empty-vs-empty no-target
// case and score 1 by convention.
double f1_from_counts(int tp, int fp, int fn);

// Scores predictions against the dataset's target boxes. Every sample must
// be predicted exactly once; throws MissingPrediction / DuplicatePrediction.
EvalReport evaluate(const std::vector<PredictionSet>& preds,
                    const std::vector<TrainingSample>& dataset, EvalSetting setting,
                    double threshold = 0.5, int jobs = 1);

}  // namespace grec
