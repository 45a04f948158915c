#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "grec/scene.hpp"

namespace grec {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const;
};

struct CameraPose {
  Vec3 position{5.5, 5.0, -9.0};
  double yaw = 0.0;    // radians; 0 faces +z
  double pitch = -0.15;  // radians; negative looks down
  double fov = 1.2217;   // vertical field of view, radians
  int image_width = 640;
  int image_height = 480;

  Vec3 forward() const;
  Vec3 right() const;
  Vec3 up() const;
  // World point -> camera space (x right, y up, z forward depth).
  Vec3 to_camera(const Vec3& world) const;
  // Camera-space point -> pixel coordinates; depth must be positive.
  void project(const Vec3& cam, double& px, double& py) const;
  double focal() const;
  bool valid() const;
};

// Default vantage, outside the grid facing it, pitched slightly down.
CameraPose default_camera(int width = 640, int height = 480);
// k-th of n positions on a ring around the grid center, same downward pitch.
CameraPose orbit_camera(int k, int n, int width = 640, int height = 480);

struct RenderOptions {
  bool draw_ids = true;
  Rgb background{135, 206, 235};
};

struct RenderedImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB
  std::string scene_id;
  CameraPose camera;

  Rgb at(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
  void put(int x, int y, Rgb c) {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    pixels[i] = c.r;
    pixels[i + 1] = c.g;
    pixels[i + 2] = c.b;
  }
};

struct PixelBBox {
  int x = 0, y = 0, w = 0, h = 0;
  auto operator<=>(const PixelBBox&) const = default;
};

struct AnnotationTriplet {
  GridCoord coord;
  PixelBBox bbox;
  BlockId id;
};

// Per-pixel block ownership alongside the image. owner[i] is the index into
// scene.blocks of the front-most block at that pixel, -1 for background.
struct RasterResult {
  RenderedImage image;
  std::vector<std::int32_t> owner;
  std::vector<int> visible_pixel_count;  // per block index
};

// A block needs at least this many front-most pixels to count as visible.
constexpr int kVisiblePixelThreshold = 8;

RasterResult render_with_owner(const Scene& scene, const CameraPose& camera,
                               const RenderOptions& options = {});

RenderedImage render(const Scene& scene, const CameraPose& camera,
                     const RenderOptions& options = {});

enum class BBoxStatus { Visible, Occluded, OutOfFrustum };

struct BBoxResult {
  BBoxStatus status = BBoxStatus::Occluded;
  PixelBBox bbox;  // meaningful only when status == Visible
};

// Tight box around the block's visibility-clipped pixels.
BBoxResult project_bbox(const Block& block, const Scene& scene, const CameraPose& camera,
                        const RenderOptions& options = {});

// One triplet per visible block, ordered by BlockId.
std::vector<AnnotationTriplet> annotate(const Scene& scene, const CameraPose& camera,
                                        const RenderOptions& options = {});

// Internal hook shared with id recovery: rasterizes a single block (its own
// faces only, given glyph text) into a scratch tile covering `rect`. Pixels
// not covered by the block keep the background color.
struct FaceRasterRequest {
  GridCoord coord;
  Rgb color;
  std::string label;   // glyph text stamped on the label face; empty = none
};

void raster_block_tile(const FaceRasterRequest& req, const CameraPose& camera,
                       const PixelBBox& rect, Rgb background,
                       std::vector<std::uint8_t>& rgb_out);

// Pixel area (in the full image) of the glyph label region for the block, 0
// when the label face is too small or back-facing. Used to decide whether a
// block's ID is legible at all.
int label_pixel_area(const GridCoord& coord, const CameraPose& camera,
                     const std::string& label);

}  // namespace grec
