#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "grec/backend.hpp"
#include "grec/refexpr.hpp"
#include "grec/render.hpp"
#include "grec/sample.hpp"

namespace grec {

constexpr double kDefaultCropMargin = 0.35;

// Crop around the target's bbox expanded by margin_fraction of its extent on
// each side, clipped to the image. Throws DegenerateCrop below 64 px^2.
RenderedImage make_crop(const RenderedImage& image, const AnnotationTriplet& target,
                        double margin_fraction);

// The constrained instruction sent to the generator backend: both canonical
// patterns verbatim, slot vocabularies, the ID-verification rule, and the
// output schema. Byte-stable for a given schema_version (golden-file tested).
std::string build_prompt(const RenderedImage& scene_image, const RenderedImage& crop,
                         const std::string& schema_version);

enum class RejectReason { SchemaError, IdMismatch, GrammarError, AmbiguousDenotation,
                          EmptyDenotation };

const char* reject_reason_name(RejectReason r);

struct Rejection {
  RejectReason reason;
  std::string detail;
};

using ValidationResult = std::variant<RefExpr, Rejection>;

// Strict gate over raw backend output: last-JSON extraction, typed schema,
// ID verification, canonical-grammar parse, and unique denotation against
// ground truth. Rejections are values, never exceptions.
ValidationResult parse_and_validate(const std::string& raw, const AnnotationTriplet& target,
                                    const Scene& scene, const CameraPose& camera);

struct RejectionStats {
  std::map<RejectReason, int> counts;
  int accepted = 0;
  int total = 0;

  int count(RejectReason r) const {
    const auto it = counts.find(r);
    return it == counts.end() ? 0 : it->second;
  }
};

struct PromptedResult {
  std::vector<TrainingSample> samples;
  RejectionStats stats;
  std::map<std::string, RenderedImage> images;  // shared scene renders
};

// n backend calls against uniformly sampled visible targets; accepted
// samples only. Rejected calls are tallied and resampled, never repaired.
// view_tag disambiguates sample ids and the shared image key when the same
// scene is synthesized under several cameras.
PromptedResult synthesize_prompted(const Scene& scene, const CameraPose& camera,
                                   GeneratorBackend& backend, int n, std::uint64_t seed,
                                   double crop_margin = kDefaultCropMargin,
                                   const std::string& view_tag = "");

}  // namespace grec
