#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grec/backend.hpp"
#include "grec/dataset.hpp"
#include "grec/recover.hpp"
#include "grec/sample.hpp"
#include "grec/scene.hpp"
#include "grec/tier2.hpp"

namespace grec {

// Batch drivers: embarrassingly parallel loops over (scene, camera) work
// items. Every driver takes a jobs count; jobs <= 1 is the serial reference
// path and jobs > 1 the OpenMP path, with byte-identical results.

struct ViewConfig {
  int cameras_per_scene = 1;  // 1 = the default vantage, >1 = an orbit ring
  int image_width = 640;
  int image_height = 480;
};

CameraPose view_camera(const ViewConfig& views, int cam_index);

// Scene i gets seed base_seed + i.
std::vector<Scene> gen_scenes(std::uint64_t base_seed, const SceneConfig& config, int count,
                              int jobs);

struct RenderedView {
  std::string scene_id;
  int cam_index = 0;
  RenderedImage image;
  std::vector<AnnotationTriplet> annotations;
};

std::vector<RenderedView> render_batch(const std::vector<Scene>& scenes, const ViewConfig& views,
                                       bool draw_ids, int jobs);

SampleSet synth_template_batch(const std::vector<Scene>& scenes, const ViewConfig& views,
                               int budget_per_view, std::uint64_t seed, int jobs);

struct PromptedBatchResult {
  SampleSet set;
  RejectionStats stats;
};

// Rule backend per view; offline and parallel.
PromptedBatchResult synth_prompted_rule_batch(const std::vector<Scene>& scenes,
                                              const ViewConfig& views, int calls_per_view,
                                              std::uint64_t seed, int jobs);

// Shared remote backend; calls stay sequential, validation is unchanged.
PromptedBatchResult synth_prompted_remote_batch(const std::vector<Scene>& scenes,
                                                const ViewConfig& views, int calls_per_view,
                                                std::uint64_t seed, GeneratorBackend& backend);

SampleSet synth_dialogue_batch(const std::vector<Scene>& scenes, const ViewConfig& views,
                               int dialogues_per_view, std::uint64_t seed, int jobs);

std::vector<RecoveryReport> recover_batch(const std::vector<Scene>& scenes,
                                          const ViewConfig& views, int noise_amplitude,
                                          std::uint64_t noise_seed, int jobs);

void merge_sample_sets(SampleSet& into, SampleSet&& from);

}  // namespace grec
