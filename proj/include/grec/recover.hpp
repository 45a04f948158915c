#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "grec/render.hpp"
#include "grec/scene.hpp"

namespace grec {

// Labels whose glyph box projects to fewer pixels than this are reported as
// skipped rather than guessed: below it distinct letters can rasterize
// identically and the argmin degenerates to the alphabetical tie-break.
constexpr int kMinLabelPixels = 110;

struct RecoveryResult {
  GridCoord block_coord;
  char recovered_letter = 'A';
  std::map<char, double> per_candidate_mae;  // normalized to [0, 1]
  double margin = 0.0;                       // best vs second-best MAE
};

enum class SkipReason { Occluded, LabelTooSmall };

struct SkippedBlock {
  GridCoord coord;
  SkipReason reason;
};

struct RecoveryReport {
  std::vector<RecoveryResult> results;   // ordered by the ID policy
  std::vector<SkippedBlock> skipped;
};

inline std::vector<char> all_letters() {
  std::vector<char> v;
  for (char c = 'A'; c <= 'Z'; ++c) v.push_back(c);
  return v;
}

// Render-and-compare over the target block's visible pixel mask: each
// candidate letter is re-rendered on the block's label face (digits follow
// the ID policy, geometry and colors fixed) and scored by MAE against the
// image. Throws TargetOccluded / EmptyCandidates.
RecoveryResult recover_letter(const RenderedImage& image, const UnlabeledScene& geometry,
                              const GridCoord& target, const std::vector<char>& candidates,
                              const RenderOptions& options = {});

// Letter recovery for every visible block; occluded or illegible blocks land
// in `skipped`. jobs > 1 runs per-block recovery under OpenMP; the output is
// identical to the serial path.
RecoveryReport recover_scene_ids(const RenderedImage& image, const UnlabeledScene& geometry,
                                 const RenderOptions& options = {}, int jobs = 1);

// Adds clamp(p + d), d uniform in [-amplitude, amplitude], per channel.
void add_uniform_noise(RenderedImage& image, int amplitude, std::uint64_t seed);

}  // namespace grec
