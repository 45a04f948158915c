#pragma once

#include <optional>
#include <string>
#include <vector>

#include "grec/render.hpp"
#include "grec/scene.hpp"

namespace grec {

enum class Axis { Vertical, XHorizontal, ZHorizontal };

// Maximal same-color contiguous run along one axis.
struct Segment {
  std::vector<Block> blocks;  // ordered ascending along the axis
  Axis axis;
  BlockColor color;
};

enum class StructureKind { Column, Row, Bar, Arch, LShape, ScatterGroup };

const char* structure_kind_word(StructureKind k);

struct Structure {
  StructureKind kind;
  std::vector<BlockId> member_ids;          // sorted
  GridCoord anchor;                         // row-major minimum of members
  std::optional<std::string> color;         // set when members share one color
};

enum class ExprForm { ColorPlural, ColorShape, OrdinalInShape, CanonicalI, CanonicalII };

const char* expr_form_name(ExprForm f);
std::optional<ExprForm> parse_expr_form(const std::string& name);

enum class Position { Top, Bottom, Left, Right, Front, Back };

const char* position_word(Position p);
std::optional<Position> parse_position(const std::string& word);

enum class Perspective { CloseToYou, FarFromYou };

const char* perspective_phrase(Perspective p);
std::optional<Perspective> parse_perspective(const std::string& phrase);

const std::vector<std::string>& ordinal_words();  // "first" .. "eleventh"

// The <reference> slot: a structure descriptor like "yellow column", "arch"
// or "scattered red blocks".
struct StructureRef {
  StructureKind kind;
  std::optional<std::string> color;
  auto operator<=>(const StructureRef&) const = default;
};

struct RefExpr {
  ExprForm form = ExprForm::ColorPlural;
  std::optional<std::string> color;
  std::optional<int> ordinal;  // 1-based
  std::optional<Position> position;
  std::optional<StructureRef> reference;
  std::optional<Perspective> perspective;
  bool plural = false;  // ColorPlural number agreement
  std::string surface;
  std::vector<BlockId> intended;  // sorted

  bool slots_equal(const RefExpr& o) const {
    return form == o.form && color == o.color && ordinal == o.ordinal &&
           position == o.position && reference == o.reference && perspective == o.perspective &&
           plural == o.plural;
  }
};

std::vector<Segment> detect_segments(const Scene& scene);

// Deterministic decomposition covering every block: arch and L-shape
// predicates claim blocks first, then columns, full-span rows, bars, and a
// per-color scatter-group fallback.
std::vector<Structure> detect_structures(const Scene& scene);

// A concrete group of blocks a StructureRef can bind to.
struct Binding {
  std::vector<Block> members;           // sorted by id
  std::optional<Axis> axis;             // set for linear groups
  bool from_segment = false;
};

// All groups the reference can denote in this scene: colored linear refs
// bind to same-color segments (column >= 2, bar 3..10, row = 11), everything
// else binds to detected structures.
std::vector<Binding> resolve_reference(const StructureRef& ref, const Scene& scene);

// Compositional denotation: color filter, structure membership,
// position/ordinal selection, perspective filter; ambiguous references
// contribute the union over their bindings. Empty result is a value, not an
// error. Throws MalformedExpr on slot-arity violations.
std::vector<BlockId> denote(const RefExpr& expr, const Scene& scene, const CameraPose& camera);

// True iff denote(expr) equals expr.intended, the intended set is non-empty,
// and no single reference binding yields a different non-empty denotation.
bool is_unambiguous(const RefExpr& expr, const Scene& scene, const CameraPose& camera);

// Surface realization from slots; ColorPlural agreement follows `plural`.
std::string render_surface(const RefExpr& expr);

// Strict parse of the closed grammar; returns slots only (no intended set).
// color_words is the vocabulary of valid color terms.
std::optional<RefExpr> parse_surface(const std::string& text,
                                     const std::vector<std::string>& color_words);

std::vector<std::string> palette_color_words(const Palette& palette);

}  // namespace grec
