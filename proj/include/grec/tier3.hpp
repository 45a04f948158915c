#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "grec/backend.hpp"
#include "grec/refexpr.hpp"
#include "grec/sample.hpp"

namespace grec {

// A scene substructure paired with an expression denoting exactly its
// members, plus their boxes aligned index-wise to the sorted member ids.
struct SubstructureExpr {
  RefExpr expr;
  std::vector<BlockId> member_ids;       // sorted
  std::vector<PixelBBox> member_bboxes;  // aligned to member_ids
};

struct DecomposeResult {
  std::vector<SubstructureExpr> substructures;
  std::vector<BlockId> uncovered;  // visible blocks no expression singles out
};

// Rule-detector decomposition: structure detection plus expression
// construction and uniqueness validation, boxes aligned programmatically.
DecomposeResult decompose(const Scene& scene, const CameraPose& camera);

// Backend-driven decomposition; each returned substructure is re-validated
// against ground truth and dropped on failure.
DecomposeResult decompose_with_backend(const Scene& scene, const CameraPose& camera,
                                       GeneratorBackend& backend);

struct CompositionRejected : std::runtime_error {
  explicit CompositionRejected(const std::string& reason) : std::runtime_error(reason) {}
};

// Deterministic dialogue assembly: 4-10 alternating turns, the target
// introduced with its full expression and referenced anaphorically later;
// the final mention is an anaphor of the target chain.
Dialogue compose_dialogue(const std::vector<SubstructureExpr>& substructures,
                          const SubstructureExpr& target, std::uint64_t seed);

// Backend-composed dialogue, structurally validated (speaker alternation,
// resolvable antecedent, final anaphor); throws CompositionRejected.
Dialogue compose_dialogue_with_backend(const std::vector<SubstructureExpr>& substructures,
                                       const SubstructureExpr& target,
                                       GeneratorBackend& backend);

// Bundles dialogue, image reference and aligned target boxes into one
// sample. Throws MisalignedTargets when a member box is missing and
// CompositionRejected when the final mention does not resolve to the target.
TrainingSample integrate_sample(const Dialogue& dialogue, const SubstructureExpr& substructure,
                                const std::string& sample_id, std::uint64_t seed,
                                const std::string& backend_descriptor = "");

}  // namespace grec
