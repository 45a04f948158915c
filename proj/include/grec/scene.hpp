#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace grec {

constexpr int kGridX = 11;  // footprint columns
constexpr int kGridZ = 11;  // footprint rows
constexpr int kDefaultGridHeight = 9;

struct GridCoord {
  int x = 0;  // column, 0..10
  int y = 0;  // height layer
  int z = 0;  // row, 0..10

  auto operator<=>(const GridCoord&) const = default;
};

// Row-major scan order used for ID assignment and canonical block order:
// bottom layer first, then by row, then by column.
struct RowMajorLess {
  bool operator()(const GridCoord& a, const GridCoord& b) const {
    if (a.y != b.y) return a.y < b.y;
    if (a.z != b.z) return a.z < b.z;
    return a.x < b.x;
  }
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  auto operator<=>(const Rgb&) const = default;
};

struct BlockColor {
  std::string name;  // lowercase single word, usable in surface text
  Rgb rgb;
  auto operator<=>(const BlockColor&) const = default;
};

// Exactly seven colors, distinct names.
using Palette = std::array<BlockColor, 7>;

Palette default_palette();

struct BlockId {
  char letter = 'A';  // uppercase Latin letter
  int digit = 1;      // positive

  std::string str() const { return std::string(1, letter) + std::to_string(digit); }
  auto operator<=>(const BlockId&) const = default;
};

std::optional<BlockId> parse_block_id(const std::string& s);

struct Block {
  GridCoord coord;
  BlockColor color;
  BlockId id;
};

struct UnlabeledBlock {
  GridCoord coord;
  BlockColor color;
};

// Scene geometry before ID assignment.
struct UnlabeledScene {
  std::vector<UnlabeledBlock> blocks;  // row-major order
  std::uint64_t seed = 0;
  std::string scene_id;
  int grid_height = kDefaultGridHeight;
};

struct Scene {
  std::vector<Block> blocks;  // row-major order, ids assigned
  std::uint64_t seed = 0;
  std::string scene_id;
  int grid_height = kDefaultGridHeight;

  const Block* find(const BlockId& id) const;
  const Block* find(const GridCoord& c) const;
};

enum class Archetype { Column, Row, Bar, Arch, LShape, Scatter };

const char* archetype_name(Archetype a);
std::optional<Archetype> parse_archetype(const std::string& name);

struct SceneConfig {
  std::vector<Archetype> archetypes = {Archetype::Column, Archetype::Row,
                                       Archetype::Bar, Archetype::Arch,
                                       Archetype::LShape, Archetype::Scatter};
  Palette palette = default_palette();
  int grid_height = kDefaultGridHeight;
  int min_blocks = 10;
  bool require_support = false;  // floating blocks allowed by default
};

// Deterministic in (seed, config). The result always contains at least one
// maximal same-color run of length >= 2 so ordinal templates are instantiable.
// Throws ConfigInfeasible when min_blocks exceeds grid capacity.
Scene generate_scene(std::uint64_t seed, const SceneConfig& config);

// Row-major ID assignment: digits 1..26 per letter, letters A..Z. Scenes
// beyond the 676-id range keep letter Z and let the digit keep growing so
// uniqueness still holds.
Scene assign_ids(const UnlabeledScene& scene);

UnlabeledScene strip_ids(const Scene& scene);

// Partition of the scene's blocks by color; only colors present appear.
std::map<std::string, std::vector<Block>> blocks_by_color(const Scene& scene);

}  // namespace grec
