#include "grec/refexpr.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "grec/error.hpp"

namespace grec {

const char* structure_kind_word(StructureKind k) {
  switch (k) {
    case StructureKind::Column: return "column";
    case StructureKind::Row: return "row";
    case StructureKind::Bar: return "bar";
    case StructureKind::Arch: return "arch";
    case StructureKind::LShape: return "L-shape";
    case StructureKind::ScatterGroup: return "scatter";
  }
  return "?";
}

const char* expr_form_name(ExprForm f) {
  switch (f) {
    case ExprForm::ColorPlural: return "color-plural";
    case ExprForm::ColorShape: return "color-shape";
    case ExprForm::OrdinalInShape: return "ordinal-in-shape";
    case ExprForm::CanonicalI: return "canonical-i";
    case ExprForm::CanonicalII: return "canonical-ii";
  }
  return "?";
}

std::optional<ExprForm> parse_expr_form(const std::string& name) {
  for (ExprForm f : {ExprForm::ColorPlural, ExprForm::ColorShape, ExprForm::OrdinalInShape,
                     ExprForm::CanonicalI, ExprForm::CanonicalII}) {
    if (name == expr_form_name(f)) return f;
  }
  return std::nullopt;
}

const char* position_word(Position p) {
  switch (p) {
    case Position::Top: return "top";
    case Position::Bottom: return "bottom";
    case Position::Left: return "left";
    case Position::Right: return "right";
    case Position::Front: return "front";
    case Position::Back: return "back";
  }
  return "?";
}

std::optional<Position> parse_position(const std::string& word) {
  for (Position p : {Position::Top, Position::Bottom, Position::Left, Position::Right,
                     Position::Front, Position::Back}) {
    if (word == position_word(p)) return p;
  }
  return std::nullopt;
}

const char* perspective_phrase(Perspective p) {
  return p == Perspective::CloseToYou ? "close to you" : "far from you";
}

std::optional<Perspective> parse_perspective(const std::string& phrase) {
  if (phrase == "close to you") return Perspective::CloseToYou;
  if (phrase == "far from you") return Perspective::FarFromYou;
  return std::nullopt;
}

const std::vector<std::string>& ordinal_words() {
  static const std::vector<std::string> kWords = {
      "first", "second", "third",  "fourth", "fifth",   "sixth",
      "seventh", "eighth", "ninth", "tenth",  "eleventh"};
  return kWords;
}

std::vector<std::string> palette_color_words(const Palette& palette) {
  std::vector<std::string> out;
  for (const auto& c : palette) out.push_back(c.name);
  return out;
}

// ---------------------------------------------------------------------------
// Segments

namespace {

struct AxisSpec {
  Axis axis;
  int GridCoord::*run;   // coordinate that advances along the run
  int GridCoord::*k1;    // the two fixed coordinates
  int GridCoord::*k2;
};

const AxisSpec kAxes[3] = {
    {Axis::Vertical, &GridCoord::y, &GridCoord::x, &GridCoord::z},
    {Axis::XHorizontal, &GridCoord::x, &GridCoord::y, &GridCoord::z},
    {Axis::ZHorizontal, &GridCoord::z, &GridCoord::x, &GridCoord::y},
};

}  // namespace

std::vector<Segment> detect_segments(const Scene& scene) {
  std::vector<Segment> out;
  for (const AxisSpec& spec : kAxes) {
    std::map<std::pair<int, int>, std::vector<Block>> lines;
    for (const Block& b : scene.blocks)
      lines[{b.coord.*spec.k1, b.coord.*spec.k2}].push_back(b);
    for (auto& [key, blocks] : lines) {
      std::sort(blocks.begin(), blocks.end(), [&](const Block& a, const Block& b) {
        return a.coord.*spec.run < b.coord.*spec.run;
      });
      Segment seg;
      seg.axis = spec.axis;
      auto flush = [&]() {
        if (!seg.blocks.empty()) {
          seg.color = seg.blocks.front().color;
          out.push_back(seg);
          seg.blocks.clear();
        }
      };
      for (const Block& b : blocks) {
        if (!seg.blocks.empty() &&
            (b.coord.*spec.run != seg.blocks.back().coord.*spec.run + 1 ||
             b.color.name != seg.blocks.back().color.name)) {
          flush();
        }
        seg.blocks.push_back(b);
      }
      flush();
    }
  }
  std::sort(out.begin(), out.end(), [](const Segment& a, const Segment& b) {
    if (a.axis != b.axis) return static_cast<int>(a.axis) < static_cast<int>(b.axis);
    if (a.color.name != b.color.name) return a.color.name < b.color.name;
    return RowMajorLess{}(a.blocks.front().coord, b.blocks.front().coord);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Structures

namespace {

class Cells {
 public:
  explicit Cells(const Scene& scene) : scene_(&scene) {
    for (std::size_t i = 0; i < scene.blocks.size(); ++i)
      index_[key(scene.blocks[i].coord)] = i;
  }

  std::optional<std::size_t> at(int x, int y, int z) const {
    if (x < 0 || x >= kGridX || z < 0 || z >= kGridZ || y < 0) return std::nullopt;
    const auto it = index_.find(key({x, y, z}));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool occupied(int x, int y, int z) const { return at(x, y, z).has_value(); }

  const Block& block(std::size_t i) const { return scene_->blocks[i]; }

 private:
  static long key(const GridCoord& c) {
    return (static_cast<long>(c.y) * kGridZ + c.z) * kGridX + c.x;
  }
  const Scene* scene_;
  std::map<long, std::size_t> index_;
};

struct Claim {
  std::vector<bool> taken;
  explicit Claim(std::size_t n) : taken(n, false) {}
  bool free(std::size_t i) const { return !taken[i]; }
  void take(const std::vector<std::size_t>& is) {
    for (auto i : is) taken[i] = true;
  }
};

struct VRun {
  int x, z, y0, height;  // cells (x, y0..y0+height-1, z)
  std::vector<std::size_t> idx;
};

std::vector<VRun> vertical_runs(const Cells& cells, const Scene& scene, const Claim& claim) {
  std::vector<VRun> runs;
  for (int z = 0; z < kGridZ; ++z) {
    for (int x = 0; x < kGridX; ++x) {
      int y = 0;
      const int top = scene.grid_height;
      while (y < top) {
        auto i = cells.at(x, y, z);
        if (!i || !claim.free(*i)) {
          ++y;
          continue;
        }
        VRun run{x, z, y, 0, {}};
        while (y < top) {
          auto j = cells.at(x, y, z);
          if (!j || !claim.free(*j)) break;
          run.idx.push_back(*j);
          ++run.height;
          ++y;
        }
        runs.push_back(std::move(run));
      }
    }
  }
  return runs;
}

struct HRun {
  bool along_x;
  int y, fixed;  // z when along_x, x otherwise
  int start, len;
  std::vector<std::size_t> idx;
};

std::vector<HRun> horizontal_runs(const Cells& cells, const Scene& scene, const Claim& claim) {
  std::vector<HRun> runs;
  for (int y = 0; y < scene.grid_height; ++y) {
    for (int z = 0; z < kGridZ; ++z) {
      int x = 0;
      while (x < kGridX) {
        auto i = cells.at(x, y, z);
        if (!i || !claim.free(*i)) {
          ++x;
          continue;
        }
        HRun run{true, y, z, x, 0, {}};
        while (x < kGridX) {
          auto j = cells.at(x, y, z);
          if (!j || !claim.free(*j)) break;
          run.idx.push_back(*j);
          ++run.len;
          ++x;
        }
        runs.push_back(std::move(run));
      }
    }
    for (int x = 0; x < kGridX; ++x) {
      int z = 0;
      while (z < kGridZ) {
        auto i = cells.at(x, y, z);
        if (!i || !claim.free(*i)) {
          ++z;
          continue;
        }
        HRun run{false, y, x, z, 0, {}};
        while (z < kGridZ) {
          auto j = cells.at(x, y, z);
          if (!j || !claim.free(*j)) break;
          run.idx.push_back(*j);
          ++run.len;
          ++z;
        }
        runs.push_back(std::move(run));
      }
    }
  }
  return runs;
}

Structure make_structure(StructureKind kind, const Scene& scene,
                         const std::vector<std::size_t>& idx) {
  Structure s;
  s.kind = kind;
  GridCoord anchor = scene.blocks[idx.front()].coord;
  std::optional<std::string> color = scene.blocks[idx.front()].color.name;
  for (const auto i : idx) {
    const Block& b = scene.blocks[i];
    s.member_ids.push_back(b.id);
    if (RowMajorLess{}(b.coord, anchor)) anchor = b.coord;
    if (color && *color != b.color.name) color.reset();
  }
  std::sort(s.member_ids.begin(), s.member_ids.end());
  s.anchor = anchor;
  s.color = color;
  return s;
}

}  // namespace

std::vector<Structure> detect_structures(const Scene& scene) {
  std::vector<Structure> out;
  Cells cells(scene);
  Claim claim(scene.blocks.size());

  // Arches: two equal-height grounded legs, an exact bridge over an empty
  // archway. Leg runs include the bridge-end block on top, so a leg of
  // height h appears as a grounded run of h+1.
  {
    auto runs = vertical_runs(cells, scene, claim);
    std::vector<VRun> grounded;
    for (const auto& r : runs)
      if (r.y0 == 0 && r.height >= 3) grounded.push_back(r);
    for (std::size_t a = 0; a < grounded.size(); ++a) {
      for (std::size_t b = a + 1; b < grounded.size(); ++b) {
        const VRun &ra = grounded[a], &rb = grounded[b];
        if (ra.height != rb.height) continue;
        const int bridge_y = ra.height - 1;
        const bool along_x = ra.z == rb.z;
        const bool along_z = ra.x == rb.x;
        if (!along_x && !along_z) continue;
        const int pa = along_x ? std::min(ra.x, rb.x) : std::min(ra.z, rb.z);
        const int pb = along_x ? std::max(ra.x, rb.x) : std::max(ra.z, rb.z);
        if (pb - pa < 2) continue;
        auto cell_at = [&](int p, int y) {
          return along_x ? cells.at(p, y, ra.z) : cells.at(ra.x, y, p);
        };
        bool ok = true;
        std::vector<std::size_t> members;
        for (int y = 0; y < bridge_y && ok; ++y) {
          auto ia = cell_at(pa, y), ib = cell_at(pb, y);
          ok = ia && ib && claim.free(*ia) && claim.free(*ib);
          if (ok) {
            members.push_back(*ia);
            members.push_back(*ib);
          }
        }
        for (int p = pa; p <= pb && ok; ++p) {
          auto i = cell_at(p, bridge_y);
          ok = i && claim.free(*i);
          if (ok) members.push_back(*i);
        }
        // open archway below the bridge
        for (int p = pa + 1; p < pb && ok; ++p)
          for (int y = 0; y < bridge_y && ok; ++y) ok = !cell_at(p, y).has_value();
        // bridge does not extend past the legs, legs do not continue above
        if (ok) {
          auto past_a = cell_at(pa - 1, bridge_y), past_b = cell_at(pb + 1, bridge_y);
          ok = !(past_a && claim.free(*past_a)) && !(past_b && claim.free(*past_b));
        }
        if (ok) ok = !cell_at(pa, bridge_y + 1).has_value() &&
                     !cell_at(pb, bridge_y + 1).has_value();
        if (ok) {
          out.push_back(make_structure(StructureKind::Arch, scene, members));
          claim.take(members);
        }
      }
    }
  }

  // L-shapes: a grounded column with exactly one ground-level arm.
  {
    auto runs = vertical_runs(cells, scene, claim);
    for (const auto& r : runs) {
      if (r.y0 != 0 || r.height < 2) continue;
      struct Dir {
        int dx, dz;
      };
      const Dir dirs[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      int arm_dir = -1;
      for (int d = 0; d < 4; ++d) {
        auto n = cells.at(r.x + dirs[d].dx, 0, r.z + dirs[d].dz);
        if (n && claim.free(*n)) {
          if (arm_dir >= 0) {
            arm_dir = -2;  // more than one arm: not an L
            break;
          }
          arm_dir = d;
        }
      }
      if (arm_dir < 0) continue;
      std::vector<std::size_t> members = r.idx;
      int i = 1;
      while (true) {
        auto n = cells.at(r.x + dirs[arm_dir].dx * i, 0, r.z + dirs[arm_dir].dz * i);
        if (!n || !claim.free(*n)) break;
        members.push_back(*n);
        ++i;
      }
      out.push_back(make_structure(StructureKind::LShape, scene, members));
      claim.take(members);
    }
  }

  // Columns
  for (const auto& r : vertical_runs(cells, scene, claim)) {
    if (r.height < 2) continue;
    out.push_back(make_structure(StructureKind::Column, scene, r.idx));
    claim.take(r.idx);
  }

  // Rows (full-span) then bars
  for (const auto& r : horizontal_runs(cells, scene, claim)) {
    if (r.len == kGridX) {
      out.push_back(make_structure(StructureKind::Row, scene, r.idx));
      claim.take(r.idx);
    }
  }
  for (const auto& r : horizontal_runs(cells, scene, claim)) {
    if (r.len >= 3) {
      out.push_back(make_structure(StructureKind::Bar, scene, r.idx));
      claim.take(r.idx);
    }
  }

  // Scatter fallback, one group per color
  std::map<std::string, std::vector<std::size_t>> leftovers;
  for (std::size_t i = 0; i < scene.blocks.size(); ++i)
    if (claim.free(i)) leftovers[scene.blocks[i].color.name].push_back(i);
  for (const auto& [color, idx] : leftovers)
    out.push_back(make_structure(StructureKind::ScatterGroup, scene, idx));

  std::sort(out.begin(), out.end(), [](const Structure& a, const Structure& b) {
    if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    return RowMajorLess{}(a.anchor, b.anchor);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Reference resolution

namespace {

Binding binding_from_blocks(std::vector<Block> blocks, std::optional<Axis> axis,
                            bool from_segment) {
  std::sort(blocks.begin(), blocks.end(),
            [](const Block& a, const Block& b) { return a.id < b.id; });
  return Binding{std::move(blocks), axis, from_segment};
}

bool linear_kind(StructureKind k) {
  return k == StructureKind::Column || k == StructureKind::Row || k == StructureKind::Bar;
}

bool segment_matches_kind(const Segment& seg, StructureKind kind) {
  const int len = static_cast<int>(seg.blocks.size());
  switch (kind) {
    case StructureKind::Column: return seg.axis == Axis::Vertical && len >= 2;
    case StructureKind::Row: return seg.axis != Axis::Vertical && len == kGridX;
    case StructureKind::Bar: return seg.axis != Axis::Vertical && len >= 3 && len < kGridX;
    default: return false;
  }
}

std::optional<Axis> structure_axis(const Structure& s, const Scene& scene) {
  bool same_xz = true, same_yz = true, same_xy = true;
  const Block* first = scene.find(s.member_ids.front());
  for (const auto& id : s.member_ids) {
    const Block* b = scene.find(id);
    same_xz &= b->coord.x == first->coord.x && b->coord.z == first->coord.z;
    same_yz &= b->coord.y == first->coord.y && b->coord.z == first->coord.z;
    same_xy &= b->coord.x == first->coord.x && b->coord.y == first->coord.y;
  }
  if (same_xz) return Axis::Vertical;
  if (same_yz) return Axis::XHorizontal;
  if (same_xy) return Axis::ZHorizontal;
  return std::nullopt;
}

}  // namespace

std::vector<Binding> resolve_reference(const StructureRef& ref, const Scene& scene) {
  std::vector<Binding> out;
  if (linear_kind(ref.kind) && ref.color) {
    // Colored linear references bind to same-color segments.
    for (const Segment& seg : detect_segments(scene)) {
      if (seg.color.name != *ref.color || !segment_matches_kind(seg, ref.kind)) continue;
      out.push_back(binding_from_blocks(seg.blocks, seg.axis, true));
    }
    return out;
  }
  for (const Structure& s : detect_structures(scene)) {
    if (s.kind != ref.kind) continue;
    if (ref.color && s.color != ref.color) continue;
    std::vector<Block> blocks;
    for (const auto& id : s.member_ids) blocks.push_back(*scene.find(id));
    out.push_back(binding_from_blocks(std::move(blocks), structure_axis(s, scene),
                                      false));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Denotation

namespace {

Vec3 block_center(const Block& b) {
  return {b.coord.x + 0.5, b.coord.y + 0.5, b.coord.z + 0.5};
}

double camera_distance(const Block& b, const CameraPose& cam) {
  return (block_center(b) - cam.position).norm();
}

double screen_x(const Block& b, const CameraPose& cam) {
  const Vec3 cs = cam.to_camera(block_center(b));
  if (cs.z < 1e-6) return 1e18;  // degenerate; deterministic sentinel
  double px, py;
  cam.project(cs, px, py);
  return px;
}

double depth(const Block& b, const CameraPose& cam) {
  return cam.to_camera(block_center(b)).z;
}

// Sort key for a position direction; ascending order puts the "first from
// <direction>" block in front. Ties resolved by BlockId.
double direction_key(const Block& b, Position p, const CameraPose& cam) {
  switch (p) {
    case Position::Top: return -static_cast<double>(b.coord.y);
    case Position::Bottom: return static_cast<double>(b.coord.y);
    case Position::Left: return screen_x(b, cam);
    case Position::Right: return -screen_x(b, cam);
    case Position::Front: return depth(b, cam);
    case Position::Back: return -depth(b, cam);
  }
  return 0;
}

std::vector<Block> order_by_position(std::vector<Block> blocks, Position p,
                                     const CameraPose& cam) {
  std::stable_sort(blocks.begin(), blocks.end(), [&](const Block& a, const Block& b) {
    const double ka = direction_key(a, p, cam), kb = direction_key(b, p, cam);
    if (ka != kb) return ka < kb;
    return a.id < b.id;
  });
  return blocks;
}

// Canonical scan order for "the k-th block of the <shape>": columns top-down,
// x-axis runs left to right on screen, z-axis runs front to back.
Position canonical_direction(Axis axis) {
  switch (axis) {
    case Axis::Vertical: return Position::Top;
    case Axis::XHorizontal: return Position::Left;
    case Axis::ZHorizontal: return Position::Front;
  }
  return Position::Top;
}

std::vector<Block> perspective_filter(const std::vector<Block>& blocks, Perspective p,
                                      const CameraPose& cam) {
  if (blocks.empty()) return {};
  const Block* best = &blocks.front();
  for (const Block& b : blocks) {
    const double d = camera_distance(b, cam), bd = camera_distance(*best, cam);
    const bool better = p == Perspective::CloseToYou ? d < bd : d > bd;
    if (better || (d == bd && b.id < best->id)) best = &b;
  }
  return {*best};
}

void require(bool cond, const char* what) {
  if (!cond) throw MalformedExpr(what);
}

void check_arity(const RefExpr& e) {
  switch (e.form) {
    case ExprForm::ColorPlural:
      require(e.color && !e.ordinal && !e.position && !e.reference && !e.perspective,
              "color-plural takes a color slot only");
      break;
    case ExprForm::ColorShape:
      require(e.color && e.reference && !e.ordinal && !e.position && !e.perspective,
              "color-shape takes color and reference");
      require(e.reference->kind != StructureKind::ScatterGroup, "color-shape needs a shape word");
      break;
    case ExprForm::OrdinalInShape:
      require(e.color && e.reference && e.ordinal && !e.position && !e.perspective,
              "ordinal-in-shape takes ordinal, color, reference");
      require(*e.ordinal >= 1, "ordinal must be positive");
      require(linear_kind(e.reference->kind), "ordinal-in-shape needs a linear shape");
      break;
    case ExprForm::CanonicalI:
      require(e.color && e.reference && e.perspective && !e.ordinal && !e.position,
              "canonical-i takes color, reference, perspective");
      break;
    case ExprForm::CanonicalII:
      require(e.color && e.reference && e.perspective && e.ordinal && e.position,
              "canonical-ii takes ordinal, color, position, reference, perspective");
      require(*e.ordinal >= 1, "ordinal must be positive");
      break;
  }
  if (e.reference && e.reference->kind == StructureKind::ScatterGroup)
    require(e.reference->color.has_value(), "scattered-blocks reference needs a color");
}

std::vector<Block> color_filter(const std::vector<Block>& blocks, const std::string& color) {
  std::vector<Block> out;
  for (const Block& b : blocks)
    if (b.color.name == color) out.push_back(b);
  return out;
}

// Denotation of the expression under one fixed reference binding.
std::vector<Block> denote_in_binding(const RefExpr& e, const Binding& binding,
                                     const CameraPose& cam) {
  switch (e.form) {
    case ExprForm::ColorShape:
      return binding.members;
    case ExprForm::OrdinalInShape: {
      if (!binding.axis) return {};
      const auto ordered =
          order_by_position(binding.members, canonical_direction(*binding.axis), cam);
      if (*e.ordinal > static_cast<int>(ordered.size())) return {};
      return {ordered[static_cast<std::size_t>(*e.ordinal - 1)]};
    }
    case ExprForm::CanonicalI: {
      Vec3 centroid{0, 0, 0};
      for (const Block& b : binding.members) centroid = centroid + block_center(b);
      centroid = centroid * (1.0 / static_cast<double>(binding.members.size()));
      const auto colored = color_filter(binding.members, *e.color);
      if (colored.empty()) return {};
      const Block* best = nullptr;
      double best_d = 0;
      bool tie = false;
      for (const Block& b : colored) {
        const Vec3 d = block_center(b) - centroid;
        const double dist = d.dot(d);
        if (best == nullptr || dist < best_d) {
          best = &b;
          best_d = dist;
          tie = false;
        } else if (dist == best_d) {
          tie = true;
        }
      }
      if (tie) return {};  // no unique center
      return perspective_filter({*best}, *e.perspective, cam);
    }
    case ExprForm::CanonicalII: {
      const auto colored = color_filter(binding.members, *e.color);
      const auto ordered = order_by_position(colored, *e.position, cam);
      if (*e.ordinal > static_cast<int>(ordered.size())) return {};
      return perspective_filter({ordered[static_cast<std::size_t>(*e.ordinal - 1)]},
                                *e.perspective, cam);
    }
    default:
      return {};
  }
}

std::vector<BlockId> to_ids(const std::vector<Block>& blocks) {
  std::vector<BlockId> ids;
  for (const Block& b : blocks) ids.push_back(b.id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace

std::vector<BlockId> denote(const RefExpr& expr, const Scene& scene, const CameraPose& camera) {
  check_arity(expr);
  if (expr.form == ExprForm::ColorPlural) {
    std::vector<Block> hits;
    for (const Block& b : scene.blocks)
      if (b.color.name == *expr.color) hits.push_back(b);
    return to_ids(hits);
  }
  std::vector<BlockId> result;
  for (const Binding& binding : resolve_reference(*expr.reference, scene)) {
    for (const BlockId& id : to_ids(denote_in_binding(expr, binding, camera)))
      result.push_back(id);
  }
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  return result;
}

bool is_unambiguous(const RefExpr& expr, const Scene& scene, const CameraPose& camera) {
  if (expr.intended.empty()) return false;
  std::vector<BlockId> intended = expr.intended;
  std::sort(intended.begin(), intended.end());
  try {
    if (denote(expr, scene, camera) != intended) return false;
    if (expr.reference) {
      for (const Binding& binding : resolve_reference(*expr.reference, scene)) {
        const auto ids = to_ids(denote_in_binding(expr, binding, camera));
        if (!ids.empty() && ids != intended) return false;
      }
    }
  } catch (const MalformedExpr&) {
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Surfaces

namespace {

std::string reference_np(const StructureRef& ref) {
  if (ref.kind == StructureKind::ScatterGroup)
    return "scattered " + *ref.color + " blocks";
  std::string np;
  if (ref.color) np = *ref.color + " ";
  return np + structure_kind_word(ref.kind);
}

}  // namespace

std::string render_surface(const RefExpr& expr) {
  std::ostringstream os;
  switch (expr.form) {
    case ExprForm::ColorPlural:
      os << "the " << *expr.color << (expr.plural ? " blocks." : " block.");
      break;
    case ExprForm::ColorShape:
      os << "the " << *expr.color << " " << structure_kind_word(expr.reference->kind) << ".";
      break;
    case ExprForm::OrdinalInShape:
      os << "the " << ordinal_words()[static_cast<std::size_t>(*expr.ordinal - 1)]
         << " block of the " << *expr.color << " "
         << structure_kind_word(expr.reference->kind) << ".";
      break;
    case ExprForm::CanonicalI:
      os << "the center " << *expr.color << " block of the " << reference_np(*expr.reference)
         << ", " << perspective_phrase(*expr.perspective) << ".";
      break;
    case ExprForm::CanonicalII:
      os << "the " << ordinal_words()[static_cast<std::size_t>(*expr.ordinal - 1)] << " "
         << *expr.color << " block from the " << position_word(*expr.position) << " of the "
         << reference_np(*expr.reference) << ", " << perspective_phrase(*expr.perspective)
         << ".";
      break;
  }
  return os.str();
}

namespace {

struct TokenStream {
  std::vector<std::string> tokens;
  std::size_t pos = 0;

  bool eat(const std::string& w) {
    if (pos < tokens.size() && tokens[pos] == w) {
      ++pos;
      return true;
    }
    return false;
  }
  const std::string* peek() const { return pos < tokens.size() ? &tokens[pos] : nullptr; }
  const std::string* take() { return pos < tokens.size() ? &tokens[pos++] : nullptr; }
  bool done() const { return pos == tokens.size(); }
};

std::optional<std::vector<std::string>> tokenize(const std::string& text) {
  if (text.empty() || text.back() != '.') return std::nullopt;
  std::string body = text.substr(0, text.size() - 1);
  if (body.find('.') != std::string::npos) return std::nullopt;
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : body) {
    if (c == ' ') {
      if (!cur.empty()) tokens.push_back(cur);
      cur.clear();
    } else if (c == ',') {
      if (!cur.empty()) tokens.push_back(cur);
      cur.clear();
      tokens.push_back(",");
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

bool is_color(const std::string& w, const std::vector<std::string>& colors) {
  return std::find(colors.begin(), colors.end(), w) != colors.end();
}

std::optional<int> ordinal_from_word(const std::string& w) {
  const auto& words = ordinal_words();
  for (std::size_t i = 0; i < words.size(); ++i)
    if (words[i] == w) return static_cast<int>(i) + 1;
  return std::nullopt;
}

std::optional<StructureKind> kind_from_word(const std::string& w) {
  for (StructureKind k : {StructureKind::Column, StructureKind::Row, StructureKind::Bar,
                          StructureKind::Arch, StructureKind::LShape}) {
    if (w == structure_kind_word(k)) return k;
  }
  return std::nullopt;
}

// reference noun phrase, already past "the"
std::optional<StructureRef> parse_ref_np(TokenStream& ts, const std::vector<std::string>& colors) {
  if (ts.eat("scattered")) {
    const std::string* c = ts.take();
    if (!c || !is_color(*c, colors) || !ts.eat("blocks")) return std::nullopt;
    return StructureRef{StructureKind::ScatterGroup, *c};
  }
  const std::string* first = ts.take();
  if (!first) return std::nullopt;
  if (is_color(*first, colors)) {
    const std::string* kw = ts.take();
    if (!kw) return std::nullopt;
    const auto kind = kind_from_word(*kw);
    if (!kind) return std::nullopt;
    return StructureRef{*kind, *first};
  }
  const auto kind = kind_from_word(*first);
  if (!kind) return std::nullopt;
  return StructureRef{*kind, std::nullopt};
}

std::optional<Perspective> parse_persp_tail(TokenStream& ts) {
  std::string phrase;
  while (const std::string* w = ts.take()) {
    if (!phrase.empty()) phrase += ' ';
    phrase += *w;
  }
  return parse_perspective(phrase);
}

}  // namespace

std::optional<RefExpr> parse_surface(const std::string& text,
                                     const std::vector<std::string>& color_words) {
  const auto tokens = tokenize(text);
  if (!tokens) return std::nullopt;
  TokenStream ts{*tokens};
  if (!ts.eat("the")) return std::nullopt;
  const std::string* t1 = ts.peek();
  if (!t1) return std::nullopt;

  RefExpr e;
  if (*t1 == "center") {
    ts.take();
    e.form = ExprForm::CanonicalI;
    const std::string* c = ts.take();
    if (!c || !is_color(*c, color_words)) return std::nullopt;
    e.color = *c;
    if (!ts.eat("block") || !ts.eat("of") || !ts.eat("the")) return std::nullopt;
    const auto ref = parse_ref_np(ts, color_words);
    if (!ref || !ts.eat(",")) return std::nullopt;
    e.reference = ref;
    const auto persp = parse_persp_tail(ts);
    if (!persp) return std::nullopt;
    e.perspective = persp;
  } else if (const auto ord = ordinal_from_word(*t1)) {
    ts.take();
    e.ordinal = ord;
    const std::string* t2 = ts.take();
    if (!t2) return std::nullopt;
    if (*t2 == "block") {
      e.form = ExprForm::OrdinalInShape;
      if (!ts.eat("of") || !ts.eat("the")) return std::nullopt;
      const std::string* c = ts.take();
      if (!c || !is_color(*c, color_words)) return std::nullopt;
      e.color = *c;
      const std::string* kw = ts.take();
      if (!kw) return std::nullopt;
      const auto kind = kind_from_word(*kw);
      if (!kind || !linear_kind(*kind)) return std::nullopt;
      e.reference = StructureRef{*kind, *c};
      if (!ts.done()) return std::nullopt;
    } else {
      e.form = ExprForm::CanonicalII;
      if (!is_color(*t2, color_words)) return std::nullopt;
      e.color = *t2;
      if (!ts.eat("block") || !ts.eat("from") || !ts.eat("the")) return std::nullopt;
      const std::string* pw = ts.take();
      if (!pw) return std::nullopt;
      const auto pos = parse_position(*pw);
      if (!pos) return std::nullopt;
      e.position = pos;
      if (!ts.eat("of") || !ts.eat("the")) return std::nullopt;
      const auto ref = parse_ref_np(ts, color_words);
      if (!ref || !ts.eat(",")) return std::nullopt;
      e.reference = ref;
      const auto persp = parse_persp_tail(ts);
      if (!persp) return std::nullopt;
      e.perspective = persp;
    }
  } else if (is_color(*t1, color_words)) {
    ts.take();
    e.color = *t1;
    const std::string* t2 = ts.take();
    if (!t2) return std::nullopt;
    if (*t2 == "block" || *t2 == "blocks") {
      e.form = ExprForm::ColorPlural;
      e.plural = (*t2 == "blocks");
      if (!ts.done()) return std::nullopt;
    } else {
      e.form = ExprForm::ColorShape;
      const auto kind = kind_from_word(*t2);
      if (!kind) return std::nullopt;
      e.reference = StructureRef{*kind, *t1};
      if (!ts.done()) return std::nullopt;
    }
  } else {
    return std::nullopt;
  }
  e.surface = text;
  return e;
}

}  // namespace grec
