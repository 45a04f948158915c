#include "grec/scene.hpp"

#include <algorithm>
#include <cctype>

#include "grec/error.hpp"
#include "grec/rng.hpp"

namespace grec {

Palette default_palette() {
  return Palette{{{"red", {178, 52, 52}},
                  {"orange", {224, 133, 36}},
                  {"yellow", {222, 207, 58}},
                  {"green", {84, 160, 60}},
                  {"blue", {56, 90, 180}},
                  {"purple", {137, 64, 178}},
                  {"white", {235, 235, 235}}}};
}

std::optional<BlockId> parse_block_id(const std::string& s) {
  if (s.size() < 2 || s[0] < 'A' || s[0] > 'Z') return std::nullopt;
  int digit = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
    digit = digit * 10 + (s[i] - '0');
  }
  if (digit <= 0) return std::nullopt;
  return BlockId{s[0], digit};
}

const Block* Scene::find(const BlockId& id) const {
  for (const auto& b : blocks)
    if (b.id == id) return &b;
  return nullptr;
}

const Block* Scene::find(const GridCoord& c) const {
  for (const auto& b : blocks)
    if (b.coord == c) return &b;
  return nullptr;
}

const char* archetype_name(Archetype a) {
  switch (a) {
    case Archetype::Column: return "column";
    case Archetype::Row: return "row";
    case Archetype::Bar: return "bar";
    case Archetype::Arch: return "arch";
    case Archetype::LShape: return "lshape";
    case Archetype::Scatter: return "scatter";
  }
  return "?";
}

std::optional<Archetype> parse_archetype(const std::string& name) {
  for (Archetype a : {Archetype::Column, Archetype::Row, Archetype::Bar,
                      Archetype::Arch, Archetype::LShape, Archetype::Scatter}) {
    if (name == archetype_name(a)) return a;
  }
  return std::nullopt;
}

namespace {

class Occupancy {
 public:
  explicit Occupancy(int height) : height_(height), cells_(kGridX * kGridZ * height, false) {}

  bool in_bounds(const GridCoord& c) const {
    return c.x >= 0 && c.x < kGridX && c.z >= 0 && c.z < kGridZ && c.y >= 0 && c.y < height_;
  }
  bool occupied(const GridCoord& c) const { return cells_[index(c)]; }
  void set(const GridCoord& c) { cells_[index(c)] = true; }
  bool free_all(const std::vector<GridCoord>& cs) const {
    for (const auto& c : cs)
      if (!in_bounds(c) || occupied(c)) return false;
    return true;
  }

 private:
  std::size_t index(const GridCoord& c) const {
    return static_cast<std::size_t>((c.y * kGridZ + c.z) * kGridX + c.x);
  }
  int height_;
  std::vector<bool> cells_;
};

struct Placement {
  std::vector<GridCoord> coords;
  std::size_t color_index;
};

// One structure placement attempt; empty coords means the attempt failed.
Placement propose(Archetype kind, Rng& rng, const SceneConfig& cfg, const Occupancy& occ) {
  Placement p;
  p.color_index = rng.uniform_index(cfg.palette.size());
  const int h = cfg.grid_height;
  switch (kind) {
    case Archetype::Column: {
      const int len = static_cast<int>(rng.uniform_int(2, std::min(5, h)));
      const int x = static_cast<int>(rng.uniform_int(0, kGridX - 1));
      const int z = static_cast<int>(rng.uniform_int(0, kGridZ - 1));
      for (int y = 0; y < len; ++y) p.coords.push_back({x, y, z});
      break;
    }
    case Archetype::Row: {
      // full-span run across the grid
      const bool along_x = rng.chance(0.5);
      if (along_x) {
        const int z = static_cast<int>(rng.uniform_int(0, kGridZ - 1));
        for (int x = 0; x < kGridX; ++x) p.coords.push_back({x, 0, z});
      } else {
        const int x = static_cast<int>(rng.uniform_int(0, kGridX - 1));
        for (int z = 0; z < kGridZ; ++z) p.coords.push_back({x, 0, z});
      }
      break;
    }
    case Archetype::Bar: {
      const int len = static_cast<int>(rng.uniform_int(3, 7));
      const bool along_x = rng.chance(0.5);
      const int x = static_cast<int>(rng.uniform_int(0, (along_x ? kGridX - len : kGridX - 1)));
      const int z = static_cast<int>(rng.uniform_int(0, (along_x ? kGridZ - 1 : kGridZ - len)));
      for (int i = 0; i < len; ++i)
        p.coords.push_back(along_x ? GridCoord{x + i, 0, z} : GridCoord{x, 0, z + i});
      break;
    }
    case Archetype::Arch: {
      if (cfg.require_support) break;  // the bridge midspan floats
      const int ch = static_cast<int>(rng.uniform_int(2, std::min(4, h - 1)));
      const int span = static_cast<int>(rng.uniform_int(3, 5));
      const bool along_x = rng.chance(0.5);
      const int x = static_cast<int>(rng.uniform_int(0, (along_x ? kGridX - span : kGridX - 1)));
      const int z = static_cast<int>(rng.uniform_int(0, (along_x ? kGridZ - 1 : kGridZ - span)));
      auto at = [&](int i, int y) {
        return along_x ? GridCoord{x + i, y, z} : GridCoord{x, y, z + i};
      };
      for (int y = 0; y < ch; ++y) {
        p.coords.push_back(at(0, y));
        p.coords.push_back(at(span - 1, y));
      }
      for (int i = 0; i < span; ++i) p.coords.push_back(at(i, ch));
      break;
    }
    case Archetype::LShape: {
      const int vlen = static_cast<int>(rng.uniform_int(2, std::min(4, h)));
      const int hlen = static_cast<int>(rng.uniform_int(2, 4));
      const bool along_x = rng.chance(0.5);
      const int x = static_cast<int>(rng.uniform_int(0, (along_x ? kGridX - hlen : kGridX - 1)));
      const int z = static_cast<int>(rng.uniform_int(0, (along_x ? kGridZ - 1 : kGridZ - hlen)));
      for (int y = 0; y < vlen; ++y) p.coords.push_back({x, y, z});
      for (int i = 1; i < hlen; ++i)
        p.coords.push_back(along_x ? GridCoord{x + i, 0, z} : GridCoord{x, 0, z + i});
      break;
    }
    case Archetype::Scatter: {
      const GridCoord c{static_cast<int>(rng.uniform_int(0, kGridX - 1)),
                        cfg.require_support ? 0 : static_cast<int>(rng.uniform_int(0, 1)),
                        static_cast<int>(rng.uniform_int(0, kGridZ - 1))};
      p.coords.push_back(c);
      break;
    }
  }
  if (!occ.free_all(p.coords)) p.coords.clear();
  return p;
}

bool support_ok(const std::vector<GridCoord>& coords, const Occupancy& occ, bool require_support) {
  if (!require_support) return true;
  auto has = [&](const GridCoord& c) {
    if (occ.occupied(c)) return true;
    return std::find(coords.begin(), coords.end(), c) != coords.end();
  };
  for (const auto& c : coords) {
    if (c.y > 0 && !has({c.x, c.y - 1, c.z})) return false;
  }
  return true;
}

bool has_same_color_run2(const std::vector<UnlabeledBlock>& blocks) {
  for (const auto& a : blocks) {
    for (const auto& b : blocks) {
      if (a.color.name != b.color.name) continue;
      const int dx = b.coord.x - a.coord.x, dy = b.coord.y - a.coord.y, dz = b.coord.z - a.coord.z;
      if ((dx == 1 && dy == 0 && dz == 0) || (dx == 0 && dy == 1 && dz == 0) ||
          (dx == 0 && dy == 0 && dz == 1))
        return true;
    }
  }
  return false;
}

}  // namespace

Scene generate_scene(std::uint64_t seed, const SceneConfig& config) {
  if (config.archetypes.empty())
    throw ConfigInfeasible("no structure archetype enabled");
  const long capacity = static_cast<long>(kGridX) * kGridZ * config.grid_height;
  if (config.min_blocks < 1 || config.min_blocks > capacity)
    throw ConfigInfeasible("min_blocks " + std::to_string(config.min_blocks) +
                           " outside grid capacity " + std::to_string(capacity));
  for (std::size_t i = 0; i < config.palette.size(); ++i)
    for (std::size_t j = i + 1; j < config.palette.size(); ++j)
      if (config.palette[i].name == config.palette[j].name)
        throw ConfigInfeasible("palette names not distinct");

  Rng rng(seed);
  Occupancy occ(config.grid_height);
  UnlabeledScene us;
  us.seed = seed;
  us.scene_id = "scene-" + std::to_string(seed);
  us.grid_height = config.grid_height;

  // First placement comes from a run-bearing archetype so the run-of-2
  // post-condition holds by construction.
  std::vector<Archetype> run_bearing;
  for (Archetype a : config.archetypes)
    if (a != Archetype::Scatter) run_bearing.push_back(a);

  int guard = 0;
  bool first = true;
  while (static_cast<int>(us.blocks.size()) < config.min_blocks) {
    if (++guard > 100000)
      throw ConfigInfeasible("placement stalled; config too dense for the grid");
    Archetype kind;
    if (first && !run_bearing.empty()) {
      kind = run_bearing[rng.uniform_index(run_bearing.size())];
    } else {
      kind = config.archetypes[rng.uniform_index(config.archetypes.size())];
    }
    Placement p = propose(kind, rng, config, occ);
    if (p.coords.empty() || !support_ok(p.coords, occ, config.require_support)) continue;
    for (const auto& c : p.coords) {
      occ.set(c);
      us.blocks.push_back({c, config.palette[p.color_index]});
    }
    first = false;
  }

  // Scatter-only configs: force a same-color adjacent pair if none landed.
  if (!has_same_color_run2(us.blocks)) {
    bool placed = false;
    for (int tries = 0; tries < 10000 && !placed; ++tries) {
      const auto& b = us.blocks[rng.uniform_index(us.blocks.size())];
      for (GridCoord n : {GridCoord{b.coord.x + 1, b.coord.y, b.coord.z},
                          GridCoord{b.coord.x, b.coord.y, b.coord.z + 1}}) {
        if (occ.in_bounds(n) && !occ.occupied(n) &&
            (!config.require_support || n.y == 0 || occ.occupied({n.x, n.y - 1, n.z}))) {
          occ.set(n);
          us.blocks.push_back({n, b.color});
          placed = true;
          break;
        }
      }
    }
    if (!placed) throw ConfigInfeasible("could not satisfy the same-color run post-condition");
  }

  std::sort(us.blocks.begin(), us.blocks.end(),
            [](const UnlabeledBlock& a, const UnlabeledBlock& b) {
              return RowMajorLess{}(a.coord, b.coord);
            });
  return assign_ids(us);
}

Scene assign_ids(const UnlabeledScene& scene) {
  std::vector<UnlabeledBlock> sorted = scene.blocks;
  std::sort(sorted.begin(), sorted.end(), [](const UnlabeledBlock& a, const UnlabeledBlock& b) {
    return RowMajorLess{}(a.coord, b.coord);
  });
  Scene out;
  out.seed = scene.seed;
  out.scene_id = scene.scene_id;
  out.grid_height = scene.grid_height;
  out.blocks.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    BlockId id;
    const std::size_t letter_index = i / 26;
    if (letter_index < 26) {
      id.letter = static_cast<char>('A' + letter_index);
      id.digit = static_cast<int>(i % 26) + 1;
    } else {
      id.letter = 'Z';
      id.digit = static_cast<int>(i - 25 * 26) + 1;
    }
    out.blocks.push_back({sorted[i].coord, sorted[i].color, id});
  }
  return out;
}

UnlabeledScene strip_ids(const Scene& scene) {
  UnlabeledScene us;
  us.seed = scene.seed;
  us.scene_id = scene.scene_id;
  us.grid_height = scene.grid_height;
  us.blocks.reserve(scene.blocks.size());
  for (const auto& b : scene.blocks) us.blocks.push_back({b.coord, b.color});
  return us;
}

std::map<std::string, std::vector<Block>> blocks_by_color(const Scene& scene) {
  std::map<std::string, std::vector<Block>> groups;
  for (const auto& b : scene.blocks) groups[b.color.name].push_back(b);
  return groups;
}

}  // namespace grec
