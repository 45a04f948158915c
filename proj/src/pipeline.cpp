#include "grec/pipeline.hpp"
#include "grec/error.hpp"

#include <algorithm>

#include "grec/parallel.hpp"
#include "grec/rng.hpp"
#include "grec/tier1.hpp"
#include "grec/tier3.hpp"

namespace grec {

namespace {

std::uint64_t view_seed(std::uint64_t base, std::size_t view_index) {
  // splitmix64 step keeps per-view streams well separated
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (view_index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string view_stem(const Scene& scene, int cam_index) {
  return scene.scene_id + "-c" + std::to_string(cam_index);
}

}  // namespace

CameraPose view_camera(const ViewConfig& views, int cam_index) {
  if (views.cameras_per_scene <= 1)
    return default_camera(views.image_width, views.image_height);
  return orbit_camera(cam_index, views.cameras_per_scene, views.image_width,
                      views.image_height);
}

std::vector<Scene> gen_scenes(std::uint64_t base_seed, const SceneConfig& config, int count,
                              int jobs) {
  std::vector<Scene> scenes(static_cast<std::size_t>(count));
  parallel_for(scenes.size(), jobs, [&](std::size_t i) {
    scenes[i] = generate_scene(base_seed + i, config);
  });
  return scenes;
}

std::vector<RenderedView> render_batch(const std::vector<Scene>& scenes, const ViewConfig& views,
                                       bool draw_ids, int jobs) {
  const std::size_t cams = static_cast<std::size_t>(std::max(1, views.cameras_per_scene));
  std::vector<RenderedView> out(scenes.size() * cams);
  RenderOptions options;
  options.draw_ids = draw_ids;
  parallel_for(out.size(), jobs, [&](std::size_t v) {
    const Scene& scene = scenes[v / cams];
    const int cam_index = static_cast<int>(v % cams);
    const CameraPose camera = view_camera(views, cam_index);
    RenderedView& rv = out[v];
    rv.scene_id = scene.scene_id;
    rv.cam_index = cam_index;
    rv.image = render(scene, camera, options);
    rv.annotations = annotate(scene, camera, options);
  });
  return out;
}

void merge_sample_sets(SampleSet& into, SampleSet&& from) {
  for (auto& s : from.samples) into.samples.push_back(std::move(s));
  for (auto& [key, image] : from.images) into.images.emplace(key, std::move(image));
}

SampleSet synth_template_batch(const std::vector<Scene>& scenes, const ViewConfig& views,
                               int budget_per_view, std::uint64_t seed, int jobs) {
  const std::size_t cams = static_cast<std::size_t>(std::max(1, views.cameras_per_scene));
  std::vector<SampleSet> slots(scenes.size() * cams);
  parallel_for(slots.size(), jobs, [&](std::size_t v) {
    const Scene& scene = scenes[v / cams];
    const int cam_index = static_cast<int>(v % cams);
    const CameraPose camera = view_camera(views, cam_index);
    const std::string stem = view_stem(scene, cam_index);
    SampleSet& set = slots[v];

    std::vector<RefExpr> exprs;
    try {
      exprs = generate_template_expressions(scene, camera, budget_per_view, view_seed(seed, v));
    } catch (const NoExpressible&) {
      return;  // a view may admit nothing; the batch keeps going
    }
    const auto annotations = annotate(scene, camera);
    const std::string image_key = "images/" + stem + ".png";
    bool any = false;
    int index = 0;
    for (const RefExpr& e : exprs) {
      try {
        TrainingSample s = build_short_sample_with(e, annotations, scene.scene_id, seed,
                                                   stem + ":t" + std::to_string(index));
        s.image_ref = image_key;
        set.samples.push_back(std::move(s));
        any = true;
        ++index;
      } catch (const TargetInvisible&) {
        // occluded target under this camera; skip the expression
      }
    }
    if (any) set.images.emplace(image_key, render(scene, camera));
  });
  SampleSet merged;
  for (auto& slot : slots) merge_sample_sets(merged, std::move(slot));
  return merged;
}

PromptedBatchResult synth_prompted_rule_batch(const std::vector<Scene>& scenes,
                                              const ViewConfig& views, int calls_per_view,
                                              std::uint64_t seed, int jobs) {
  const std::size_t cams = static_cast<std::size_t>(std::max(1, views.cameras_per_scene));
  std::vector<PromptedResult> slots(scenes.size() * cams);
  parallel_for(slots.size(), jobs, [&](std::size_t v) {
    const Scene& scene = scenes[v / cams];
    const int cam_index = static_cast<int>(v % cams);
    const CameraPose camera = view_camera(views, cam_index);
    DeterministicRuleBackend backend(scene, camera);
    slots[v] = synthesize_prompted(scene, camera, backend, calls_per_view, view_seed(seed, v),
                                   kDefaultCropMargin, "c" + std::to_string(cam_index));
  });
  PromptedBatchResult out;
  for (auto& slot : slots) {
    merge_sample_sets(out.set, SampleSet{std::move(slot.samples), std::move(slot.images)});
    for (const auto& [reason, count] : slot.stats.counts) out.stats.counts[reason] += count;
    out.stats.accepted += slot.stats.accepted;
    out.stats.total += slot.stats.total;
  }
  return out;
}

PromptedBatchResult synth_prompted_remote_batch(const std::vector<Scene>& scenes,
                                                const ViewConfig& views, int calls_per_view,
                                                std::uint64_t seed, GeneratorBackend& backend) {
  const std::size_t cams = static_cast<std::size_t>(std::max(1, views.cameras_per_scene));
  PromptedBatchResult out;
  for (std::size_t v = 0; v < scenes.size() * cams; ++v) {
    const Scene& scene = scenes[v / cams];
    const int cam_index = static_cast<int>(v % cams);
    const CameraPose camera = view_camera(views, cam_index);
    PromptedResult r = synthesize_prompted(scene, camera, backend, calls_per_view,
                                           view_seed(seed, v), kDefaultCropMargin,
                                           "c" + std::to_string(cam_index));
    merge_sample_sets(out.set, SampleSet{std::move(r.samples), std::move(r.images)});
    for (const auto& [reason, count] : r.stats.counts) out.stats.counts[reason] += count;
    out.stats.accepted += r.stats.accepted;
    out.stats.total += r.stats.total;
  }
  return out;
}

SampleSet synth_dialogue_batch(const std::vector<Scene>& scenes, const ViewConfig& views,
                               int dialogues_per_view, std::uint64_t seed, int jobs) {
  const std::size_t cams = static_cast<std::size_t>(std::max(1, views.cameras_per_scene));
  std::vector<SampleSet> slots(scenes.size() * cams);
  parallel_for(slots.size(), jobs, [&](std::size_t v) {
    const Scene& scene = scenes[v / cams];
    const int cam_index = static_cast<int>(v % cams);
    const CameraPose camera = view_camera(views, cam_index);
    const std::string stem = view_stem(scene, cam_index);
    SampleSet& set = slots[v];

    const DecomposeResult dec = decompose(scene, camera);
    if (dec.substructures.empty()) return;
    const std::string image_key = "images/" + stem + ".png";
    bool any = false;
    for (int j = 0; j < dialogues_per_view; ++j) {
      const SubstructureExpr& target =
          dec.substructures[static_cast<std::size_t>(j) % dec.substructures.size()];
      const std::uint64_t dlg_seed = view_seed(seed, v) + static_cast<std::uint64_t>(j);
      try {
        const Dialogue d = compose_dialogue(dec.substructures, target, dlg_seed);
        TrainingSample s =
            integrate_sample(d, target, stem + ":d" + std::to_string(j), dlg_seed);
        s.image_ref = image_key;
        set.samples.push_back(std::move(s));
        any = true;
      } catch (const CompositionRejected&) {
        // skip this target/seed pair
      }
    }
    if (any) set.images.emplace(image_key, render(scene, camera));
  });
  SampleSet merged;
  for (auto& slot : slots) merge_sample_sets(merged, std::move(slot));
  return merged;
}

std::vector<RecoveryReport> recover_batch(const std::vector<Scene>& scenes,
                                          const ViewConfig& views, int noise_amplitude,
                                          std::uint64_t noise_seed, int jobs) {
  std::vector<RecoveryReport> out(scenes.size());
  parallel_for(scenes.size(), jobs, [&](std::size_t i) {
    const CameraPose camera = view_camera(views, 0);
    RenderedImage image = render(scenes[i], camera);
    if (noise_amplitude > 0) add_uniform_noise(image, noise_amplitude, noise_seed + i);
    out[i] = recover_scene_ids(image, strip_ids(scenes[i]));
  });
  return out;
}

}  // namespace grec
