#include "grec/recover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "grec/error.hpp"
#include "grec/parallel.hpp"
#include "grec/rng.hpp"

namespace grec {

namespace {

struct Mask {
  PixelBBox rect;
  std::vector<std::size_t> pixels;  // flat indices into the full image
};

Mask block_mask(const RasterResult& rr, std::int32_t index) {
  Mask m;
  const int w = rr.image.width, h = rr.image.height;
  int min_x = w, max_x = -1, min_y = h, max_y = -1;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (rr.owner[idx] != index) continue;
      m.pixels.push_back(idx);
      min_x = std::min(min_x, x);
      max_x = std::max(max_x, x);
      min_y = std::min(min_y, y);
      max_y = std::max(max_y, y);
    }
  }
  if (max_x >= min_x) m.rect = {min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
  return m;
}

RecoveryResult recover_with_mask(const RenderedImage& image, const Block& block,
                                 const Mask& mask, const std::vector<char>& candidates) {
  RecoveryResult res;
  res.block_coord = block.coord;
  std::vector<char> sorted = candidates;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  const std::string digits = block.id.str().substr(1);
  std::vector<std::uint8_t> tile;
  double best = std::numeric_limits<double>::infinity();
  double second = std::numeric_limits<double>::infinity();
  for (char letter : sorted) {
    FaceRasterRequest req{block.coord, block.color.rgb, std::string(1, letter) + digits};
    raster_block_tile(req, image.camera, mask.rect, Rgb{0, 0, 0}, tile);
    long long abs_sum = 0;
    for (const std::size_t p : mask.pixels) {
      const int x = static_cast<int>(p % image.width);
      const int y = static_cast<int>(p / image.width);
      const std::size_t t =
          (static_cast<std::size_t>(y - mask.rect.y) * mask.rect.w + (x - mask.rect.x)) * 3;
      const std::size_t s = p * 3;
      abs_sum += std::abs(static_cast<int>(tile[t]) - static_cast<int>(image.pixels[s]));
      abs_sum += std::abs(static_cast<int>(tile[t + 1]) - static_cast<int>(image.pixels[s + 1]));
      abs_sum += std::abs(static_cast<int>(tile[t + 2]) - static_cast<int>(image.pixels[s + 2]));
    }
    const double mae =
        static_cast<double>(abs_sum) / (3.0 * 255.0 * static_cast<double>(mask.pixels.size()));
    res.per_candidate_mae[letter] = mae;
    if (mae < best) {
      second = best;
      best = mae;
      res.recovered_letter = letter;  // sorted scan: ties keep the earlier letter
    } else if (mae < second) {
      second = mae;
    }
  }
  res.margin = std::isinf(second) ? 0.0 : second - best;
  return res;
}

}  // namespace

RecoveryResult recover_letter(const RenderedImage& image, const UnlabeledScene& geometry,
                              const GridCoord& target, const std::vector<char>& candidates,
                              const RenderOptions& options) {
  if (candidates.empty()) throw EmptyCandidates("candidate letter list is empty");
  const Scene labeled = assign_ids(geometry);
  const Block* block = labeled.find(target);
  if (block == nullptr) throw TargetOccluded("target coordinate not in scene");
  const RasterResult rr = render_with_owner(labeled, image.camera, options);
  std::int32_t index = -1;
  for (std::size_t i = 0; i < labeled.blocks.size(); ++i)
    if (labeled.blocks[i].coord == target) index = static_cast<std::int32_t>(i);
  const Mask mask = block_mask(rr, index);
  if (static_cast<int>(mask.pixels.size()) < kVisiblePixelThreshold)
    throw TargetOccluded("target block has no visible pixels");
  return recover_with_mask(image, *block, mask, candidates);
}

RecoveryReport recover_scene_ids(const RenderedImage& image, const UnlabeledScene& geometry,
                                 const RenderOptions& options, int jobs) {
  RecoveryReport report;
  const Scene labeled = assign_ids(geometry);
  if (labeled.blocks.empty()) return report;
  const RasterResult rr = render_with_owner(labeled, image.camera, options);

  struct Slot {
    bool visible = false;
    bool legible = false;
    RecoveryResult result;
  };
  std::vector<Slot> slots(labeled.blocks.size());
  const std::vector<char> candidates = all_letters();

  parallel_for(labeled.blocks.size(), jobs, [&](std::size_t i) {
    const Block& b = labeled.blocks[i];
    const Mask mask = block_mask(rr, static_cast<std::int32_t>(i));
    Slot& slot = slots[i];
    if (static_cast<int>(mask.pixels.size()) < kVisiblePixelThreshold) return;
    slot.visible = true;
    if (label_pixel_area(b.coord, image.camera, b.id.str()) < kMinLabelPixels) return;
    slot.legible = true;
    slot.result = recover_with_mask(image, b, mask, candidates);
  });

  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i].visible) {
      report.skipped.push_back({labeled.blocks[i].coord, SkipReason::Occluded});
    } else if (!slots[i].legible) {
      report.skipped.push_back({labeled.blocks[i].coord, SkipReason::LabelTooSmall});
    } else {
      report.results.push_back(slots[i].result);
    }
  }
  return report;
}

void add_uniform_noise(RenderedImage& image, int amplitude, std::uint64_t seed) {
  Rng rng(seed);
  for (auto& p : image.pixels) {
    const int d = static_cast<int>(rng.uniform_int(-amplitude, amplitude));
    p = static_cast<std::uint8_t>(std::clamp(static_cast<int>(p) + d, 0, 255));
  }
}

}  // namespace grec
