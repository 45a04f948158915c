#pragma once

#include <cstdint>
#include <vector>

#include "grec/refexpr.hpp"
#include "grec/sample.hpp"

namespace grec {

// Template-tier synthesis: instantiates the three short-expression templates
// over detected segments and structures and keeps only instantiations that
// pass the uniqueness oracle. Deterministic per seed; form quotas are
// balanced within +-1 when the budget allows. Throws NoExpressible when the
// scene admits nothing.
std::vector<RefExpr> generate_template_expressions(const Scene& scene, const CameraPose& camera,
                                                   int budget, std::uint64_t seed);

// Exhaustive candidate list (pre-sampling); exposed for coverage tests.
std::vector<RefExpr> enumerate_template_expressions(const Scene& scene,
                                                    const CameraPose& camera);

// Pairs the expression with a rendered view and the intended blocks' boxes.
// Throws TargetInvisible when an intended block has no visible pixels.
TrainingSample build_short_sample(const RefExpr& expr, const Scene& scene,
                                  const CameraPose& camera, const std::string& sample_id = "");

// Same, against a precomputed annotation pass (batch path).
TrainingSample build_short_sample_with(const RefExpr& expr,
                                       const std::vector<AnnotationTriplet>& annotations,
                                       const std::string& scene_id, std::uint64_t seed,
                                       const std::string& sample_id);

}  // namespace grec
