#include "grec/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "grec/font5x7.hpp"

namespace grec {

namespace {
constexpr double kNearPlane = 0.05;
constexpr double kPi = 3.14159265358979323846;
}  // namespace

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

Vec3 CameraPose::forward() const {
  return {std::sin(yaw) * std::cos(pitch), std::sin(pitch), std::cos(yaw) * std::cos(pitch)};
}

Vec3 CameraPose::right() const { return {std::cos(yaw), 0.0, -std::sin(yaw)}; }

Vec3 CameraPose::up() const { return forward().cross(right()); }

Vec3 CameraPose::to_camera(const Vec3& world) const {
  const Vec3 d = world - position;
  return {d.dot(right()), d.dot(up()), d.dot(forward())};
}

double CameraPose::focal() const { return (image_height / 2.0) / std::tan(fov / 2.0); }

void CameraPose::project(const Vec3& cam, double& px, double& py) const {
  const double f = focal();
  px = image_width / 2.0 + f * cam.x / cam.z;
  py = image_height / 2.0 - f * cam.y / cam.z;
}

bool CameraPose::valid() const {
  return fov > 0.0 && fov < kPi && image_width >= 64 && image_height >= 64;
}

CameraPose default_camera(int width, int height) {
  CameraPose c;
  c.image_width = width;
  c.image_height = height;
  return c;
}

CameraPose orbit_camera(int k, int n, int width, int height) {
  CameraPose c;
  const double theta = 2.0 * kPi * (n > 0 ? static_cast<double>(k % n) / n : 0.0);
  const double radius = 14.0;
  const Vec3 center{5.5, 0.0, 5.5};
  c.position = {center.x + radius * std::sin(theta), 6.0, center.z + radius * std::cos(theta)};
  c.yaw = theta + kPi;
  c.pitch = -0.28;
  c.image_width = width;
  c.image_height = height;
  return c;
}

namespace {

// Face definitions: origin corner plus (u, v) axes chosen so glyphs read
// upright when the face is seen from outside. v runs down the face.
struct FaceDef {
  Vec3 origin, u_axis, v_axis, normal;
};

std::array<FaceDef, 6> cube_faces(const GridCoord& c) {
  const double x = c.x, y = c.y, z = c.z;
  return {{
      // -z (toward default camera)
      {{x, y + 1, z}, {1, 0, 0}, {0, -1, 0}, {0, 0, -1}},
      // +z
      {{x + 1, y + 1, z + 1}, {-1, 0, 0}, {0, -1, 0}, {0, 0, 1}},
      // -x
      {{x, y + 1, z + 1}, {0, 0, -1}, {0, -1, 0}, {-1, 0, 0}},
      // +x
      {{x + 1, y + 1, z}, {0, 0, 1}, {0, -1, 0}, {1, 0, 0}},
      // +y (top)
      {{x, y + 1, z + 1}, {1, 0, 0}, {0, 0, -1}, {0, 1, 0}},
      // -y (bottom)
      {{x, y, z}, {1, 0, 0}, {0, 0, 1}, {0, -1, 0}},
  }};
}

double face_shade(int face) {
  static constexpr double kShade[6] = {0.90, 0.55, 0.70, 0.82, 1.00, 0.45};
  return kShade[face];
}

Rgb shade_color(Rgb base, double f) {
  auto s = [&](std::uint8_t v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v * f, 0.0, 255.0)));
  };
  return {s(base.r), s(base.g), s(base.b)};
}

Rgb glyph_color_for(Rgb face) {
  const double lum = 0.2126 * face.r + 0.7152 * face.g + 0.0722 * face.b;
  return lum > 127.0 ? Rgb{20, 20, 20} : Rgb{240, 240, 240};
}

// Glyph text box on the unit face, kept clear of the edges.
struct TextBox {
  double u0, v0, cell;  // cell = side of one font cell in face units
  int cols, rows;
};

TextBox text_box(const std::string& label) {
  const int n = std::max<int>(1, static_cast<int>(label.size()));
  TextBox tb;
  tb.cols = 6 * n - 1;
  tb.rows = kFontRows;
  tb.cell = std::min(0.80 / tb.cols, 0.50 / tb.rows);
  tb.u0 = 0.5 - tb.cols * tb.cell / 2.0;
  tb.v0 = 0.5 - tb.rows * tb.cell / 2.0;
  return tb;
}

bool glyph_lit(const std::string& label, const TextBox& tb, double u, double v) {
  const double cu = (u - tb.u0) / tb.cell;
  const double cv = (v - tb.v0) / tb.cell;
  if (cu < 0 || cv < 0 || cu >= tb.cols || cv >= tb.rows) return false;
  const int col = static_cast<int>(cu);
  const int row = static_cast<int>(cv);
  const int ch = col / 6;
  const int in_ch = col % 6;
  if (in_ch >= kFontCols) return false;  // inter-character gap
  if (ch >= static_cast<int>(label.size())) return false;
  return font_cell(label[static_cast<std::size_t>(ch)], in_ch, row);
}

struct ClipVert {
  Vec3 cam;  // camera space
  double u, v;
};

// Sutherland-Hodgman against the near plane (z >= kNearPlane).
std::vector<ClipVert> clip_near(const std::vector<ClipVert>& poly) {
  std::vector<ClipVert> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const ClipVert& a = poly[i];
    const ClipVert& b = poly[(i + 1) % n];
    const bool ain = a.cam.z >= kNearPlane;
    const bool bin = b.cam.z >= kNearPlane;
    if (ain) out.push_back(a);
    if (ain != bin) {
      const double t = (kNearPlane - a.cam.z) / (b.cam.z - a.cam.z);
      ClipVert m;
      m.cam = a.cam + (b.cam - a.cam) * t;
      m.u = a.u + (b.u - a.u) * t;
      m.v = a.v + (b.v - a.v) * t;
      out.push_back(m);
    }
  }
  return out;
}

struct ScreenVert {
  double px, py;
  double inv_z, u_over_z, v_over_z;
};

// Raster destination: a rectangle of the image plane with its own depth
// buffer; `owner` may be null (single-block tiles don't track it).
struct RasterTarget {
  int x0 = 0, y0 = 0, w = 0, h = 0;
  std::uint8_t* rgb = nullptr;
  double* depth = nullptr;
  std::int32_t* owner = nullptr;
  int* visible_count = nullptr;  // per block index, full-scene pass only
};

void raster_triangle(RasterTarget& t, const CameraPose& cam, const ScreenVert& a,
                     const ScreenVert& b, const ScreenVert& c, Rgb face_rgb,
                     const std::string& label, const TextBox* tb, Rgb glyph_rgb,
                     std::int32_t block_index) {
  double area = (b.px - a.px) * (c.py - a.py) - (b.py - a.py) * (c.px - a.px);
  if (area == 0.0) return;
  double sign = 1.0;
  if (area < 0) {
    sign = -1.0;
    area = -area;
  }
  (void)cam;
  const int min_x = std::max(t.x0, static_cast<int>(std::floor(std::min({a.px, b.px, c.px}))));
  const int max_x =
      std::min(t.x0 + t.w - 1, static_cast<int>(std::ceil(std::max({a.px, b.px, c.px}))));
  const int min_y = std::max(t.y0, static_cast<int>(std::floor(std::min({a.py, b.py, c.py}))));
  const int max_y =
      std::min(t.y0 + t.h - 1, static_cast<int>(std::ceil(std::max({a.py, b.py, c.py}))));
  for (int y = min_y; y <= max_y; ++y) {
    for (int x = min_x; x <= max_x; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      const double w0 = sign * ((b.px - a.px) * (py - a.py) - (b.py - a.py) * (px - a.px));
      const double w1 = sign * ((c.px - b.px) * (py - b.py) - (c.py - b.py) * (px - b.px));
      const double w2 = sign * ((a.px - c.px) * (py - c.py) - (a.py - c.py) * (px - c.px));
      if (w0 < 0 || w1 < 0 || w2 < 0) continue;
      const double b0 = w1 / area, b1 = w2 / area, b2 = w0 / area;
      const double inv_z = b0 * a.inv_z + b1 * b.inv_z + b2 * c.inv_z;
      if (inv_z <= 0) continue;
      const double z = 1.0 / inv_z;
      const std::size_t idx =
          static_cast<std::size_t>(y - t.y0) * t.w + static_cast<std::size_t>(x - t.x0);
      if (z >= t.depth[idx]) continue;
      Rgb out = face_rgb;
      if (tb != nullptr) {
        const double u = (b0 * a.u_over_z + b1 * b.u_over_z + b2 * c.u_over_z) / inv_z;
        const double v = (b0 * a.v_over_z + b1 * b.v_over_z + b2 * c.v_over_z) / inv_z;
        if (glyph_lit(label, *tb, u, v)) out = glyph_rgb;
      }
      if (t.visible_count != nullptr && t.owner != nullptr) {
        const std::int32_t prev = t.owner[idx];
        if (prev >= 0 && prev != block_index) t.visible_count[prev]--;
        if (prev != block_index) t.visible_count[block_index]++;
      }
      t.depth[idx] = z;
      if (t.owner != nullptr) t.owner[idx] = block_index;
      t.rgb[idx * 3] = out.r;
      t.rgb[idx * 3 + 1] = out.g;
      t.rgb[idx * 3 + 2] = out.b;
    }
  }
}

// Index of the front-facing face with the largest projected area; -1 if the
// cube is effectively invisible or straddles the near plane.
int pick_label_face(const GridCoord& coord, const CameraPose& camera) {
  const auto faces = cube_faces(coord);
  int best = -1;
  double best_area = 0.0;
  for (int f = 0; f < 6; ++f) {
    const FaceDef& fd = faces[f];
    const Vec3 center = fd.origin + fd.u_axis * 0.5 + fd.v_axis * 0.5;
    if (fd.normal.dot(camera.position - center) <= 0) continue;
    double px[4], py[4];
    bool ok = true;
    const Vec3 corners[4] = {fd.origin, fd.origin + fd.u_axis, fd.origin + fd.u_axis + fd.v_axis,
                             fd.origin + fd.v_axis};
    for (int i = 0; i < 4 && ok; ++i) {
      const Vec3 cs = camera.to_camera(corners[i]);
      if (cs.z < kNearPlane) ok = false;
      else camera.project(cs, px[i], py[i]);
    }
    if (!ok) continue;
    double area = 0.0;
    for (int i = 0; i < 4; ++i) {
      const int j = (i + 1) % 4;
      area += px[i] * py[j] - px[j] * py[i];
    }
    area = std::abs(area) / 2.0;
    if (area > best_area) {
      best_area = area;
      best = f;
    }
  }
  return best;
}

void draw_block(RasterTarget& target, const CameraPose& camera, const GridCoord& coord,
                Rgb base_color, const std::string& label, std::int32_t block_index) {
  const auto faces = cube_faces(coord);
  const int label_face = label.empty() ? -1 : pick_label_face(coord, camera);
  const TextBox tb = text_box(label);
  for (int f = 0; f < 6; ++f) {
    const FaceDef& fd = faces[f];
    const Vec3 center = fd.origin + fd.u_axis * 0.5 + fd.v_axis * 0.5;
    if (fd.normal.dot(camera.position - center) <= 0) continue;
    std::vector<ClipVert> poly = {
        {camera.to_camera(fd.origin), 0, 0},
        {camera.to_camera(fd.origin + fd.u_axis), 1, 0},
        {camera.to_camera(fd.origin + fd.u_axis + fd.v_axis), 1, 1},
        {camera.to_camera(fd.origin + fd.v_axis), 0, 1},
    };
    poly = clip_near(poly);
    if (poly.size() < 3) continue;
    std::vector<ScreenVert> sv(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) {
      camera.project(poly[i].cam, sv[i].px, sv[i].py);
      sv[i].inv_z = 1.0 / poly[i].cam.z;
      sv[i].u_over_z = poly[i].u * sv[i].inv_z;
      sv[i].v_over_z = poly[i].v * sv[i].inv_z;
    }
    const Rgb face_rgb = shade_color(base_color, face_shade(f));
    const Rgb glyph_rgb = glyph_color_for(face_rgb);
    const TextBox* tbp = (f == label_face) ? &tb : nullptr;
    for (std::size_t i = 1; i + 1 < sv.size(); ++i) {
      raster_triangle(target, camera, sv[0], sv[i], sv[i + 1], face_rgb, label, tbp, glyph_rgb,
                      block_index);
    }
  }
}

}  // namespace

RasterResult render_with_owner(const Scene& scene, const CameraPose& camera,
                               const RenderOptions& options) {
  RasterResult rr;
  rr.image.width = camera.image_width;
  rr.image.height = camera.image_height;
  rr.image.scene_id = scene.scene_id;
  rr.image.camera = camera;
  const std::size_t n = static_cast<std::size_t>(camera.image_width) * camera.image_height;
  rr.image.pixels.resize(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    rr.image.pixels[i * 3] = options.background.r;
    rr.image.pixels[i * 3 + 1] = options.background.g;
    rr.image.pixels[i * 3 + 2] = options.background.b;
  }
  rr.owner.assign(n, -1);
  rr.visible_pixel_count.assign(scene.blocks.size(), 0);
  std::vector<double> depth(n, std::numeric_limits<double>::infinity());

  RasterTarget target;
  target.x0 = 0;
  target.y0 = 0;
  target.w = camera.image_width;
  target.h = camera.image_height;
  target.rgb = rr.image.pixels.data();
  target.depth = depth.data();
  target.owner = rr.owner.data();
  target.visible_count = rr.visible_pixel_count.data();

  for (std::size_t i = 0; i < scene.blocks.size(); ++i) {
    const Block& b = scene.blocks[i];
    draw_block(target, camera, b.coord, b.color.rgb,
               options.draw_ids ? b.id.str() : std::string(), static_cast<std::int32_t>(i));
  }
  return rr;
}

RenderedImage render(const Scene& scene, const CameraPose& camera, const RenderOptions& options) {
  return render_with_owner(scene, camera, options).image;
}

BBoxResult project_bbox(const Block& block, const Scene& scene, const CameraPose& camera,
                        const RenderOptions& options) {
  const RasterResult rr = render_with_owner(scene, camera, options);
  std::int32_t index = -1;
  for (std::size_t i = 0; i < scene.blocks.size(); ++i) {
    if (scene.blocks[i].id == block.id) index = static_cast<std::int32_t>(i);
  }
  BBoxResult res;
  if (index < 0) {
    res.status = BBoxStatus::Occluded;
    return res;
  }
  int min_x = camera.image_width, max_x = -1, min_y = camera.image_height, max_y = -1;
  for (int y = 0; y < camera.image_height; ++y) {
    for (int x = 0; x < camera.image_width; ++x) {
      if (rr.owner[static_cast<std::size_t>(y) * camera.image_width + x] == index) {
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
      }
    }
  }
  if (max_x < min_x || rr.visible_pixel_count[static_cast<std::size_t>(index)] <
                           kVisiblePixelThreshold) {
    // Distinguish occlusion from never entering the frame.
    bool any_in_frame = false;
    const Vec3 base{static_cast<double>(block.coord.x), static_cast<double>(block.coord.y),
                    static_cast<double>(block.coord.z)};
    for (int dx = 0; dx <= 1; ++dx)
      for (int dy = 0; dy <= 1; ++dy)
        for (int dz = 0; dz <= 1; ++dz) {
          const Vec3 cs = camera.to_camera(base + Vec3{static_cast<double>(dx),
                                                       static_cast<double>(dy),
                                                       static_cast<double>(dz)});
          if (cs.z < kNearPlane) continue;
          double px, py;
          camera.project(cs, px, py);
          if (px >= 0 && px < camera.image_width && py >= 0 && py < camera.image_height)
            any_in_frame = true;
        }
    res.status = any_in_frame ? BBoxStatus::Occluded : BBoxStatus::OutOfFrustum;
    return res;
  }
  res.status = BBoxStatus::Visible;
  res.bbox = {min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
  return res;
}

std::vector<AnnotationTriplet> annotate(const Scene& scene, const CameraPose& camera,
                                        const RenderOptions& options) {
  const RasterResult rr = render_with_owner(scene, camera, options);
  struct Box {
    int min_x, max_x, min_y, max_y;
  };
  std::vector<Box> boxes(scene.blocks.size(),
                         {camera.image_width, -1, camera.image_height, -1});
  for (int y = 0; y < camera.image_height; ++y) {
    for (int x = 0; x < camera.image_width; ++x) {
      const std::int32_t o = rr.owner[static_cast<std::size_t>(y) * camera.image_width + x];
      if (o < 0) continue;
      Box& b = boxes[static_cast<std::size_t>(o)];
      b.min_x = std::min(b.min_x, x);
      b.max_x = std::max(b.max_x, x);
      b.min_y = std::min(b.min_y, y);
      b.max_y = std::max(b.max_y, y);
    }
  }
  std::vector<AnnotationTriplet> out;
  for (std::size_t i = 0; i < scene.blocks.size(); ++i) {
    if (rr.visible_pixel_count[i] < kVisiblePixelThreshold) continue;
    const Box& b = boxes[i];
    if (b.max_x < b.min_x) continue;
    out.push_back({scene.blocks[i].coord,
                   {b.min_x, b.min_y, b.max_x - b.min_x + 1, b.max_y - b.min_y + 1},
                   scene.blocks[i].id});
  }
  std::sort(out.begin(), out.end(),
            [](const AnnotationTriplet& a, const AnnotationTriplet& b) { return a.id < b.id; });
  return out;
}

void raster_block_tile(const FaceRasterRequest& req, const CameraPose& camera,
                       const PixelBBox& rect, Rgb background, std::vector<std::uint8_t>& rgb_out) {
  const std::size_t n = static_cast<std::size_t>(rect.w) * rect.h;
  rgb_out.resize(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    rgb_out[i * 3] = background.r;
    rgb_out[i * 3 + 1] = background.g;
    rgb_out[i * 3 + 2] = background.b;
  }
  std::vector<double> depth(n, std::numeric_limits<double>::infinity());
  RasterTarget target;
  target.x0 = rect.x;
  target.y0 = rect.y;
  target.w = rect.w;
  target.h = rect.h;
  target.rgb = rgb_out.data();
  target.depth = depth.data();
  draw_block(target, camera, req.coord, req.color, req.label, 0);
}

int label_pixel_area(const GridCoord& coord, const CameraPose& camera,
                     const std::string& label) {
  const int f = pick_label_face(coord, camera);
  if (f < 0) return 0;
  const FaceDef fd = cube_faces(coord)[static_cast<std::size_t>(f)];
  const TextBox tb = text_box(label);
  const double u1 = tb.u0 + tb.cols * tb.cell, v1 = tb.v0 + tb.rows * tb.cell;
  const Vec3 corners[4] = {
      fd.origin + fd.u_axis * tb.u0 + fd.v_axis * tb.v0,
      fd.origin + fd.u_axis * u1 + fd.v_axis * tb.v0,
      fd.origin + fd.u_axis * u1 + fd.v_axis * v1,
      fd.origin + fd.u_axis * tb.u0 + fd.v_axis * v1,
  };
  double px[4], py[4];
  for (int i = 0; i < 4; ++i) {
    const Vec3 cs = camera.to_camera(corners[i]);
    if (cs.z < kNearPlane) return 0;
    camera.project(cs, px[i], py[i]);
  }
  double area = 0.0;
  for (int i = 0; i < 4; ++i) {
    const int j = (i + 1) % 4;
    area += px[i] * py[j] - px[j] * py[i];
  }
  return static_cast<int>(std::abs(area) / 2.0);
}

}  // namespace grec
