#include "grec/tier1.hpp"

#include <algorithm>
#include <array>
#include <map>

#include "grec/error.hpp"
#include "grec/rng.hpp"

namespace grec {

namespace {

std::vector<BlockId> ids_of(const std::vector<Block>& blocks) {
  std::vector<BlockId> ids;
  for (const Block& b : blocks) ids.push_back(b.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

RefExpr finish(RefExpr e) {
  e.surface = render_surface(e);
  return e;
}

}  // namespace

std::vector<RefExpr> enumerate_template_expressions(const Scene& scene,
                                                    const CameraPose& camera) {
  std::vector<RefExpr> candidates;

  for (const auto& [color, blocks] : blocks_by_color(scene)) {
    RefExpr e;
    e.form = ExprForm::ColorPlural;
    e.color = color;
    e.plural = blocks.size() > 1;
    e.intended = ids_of(blocks);
    candidates.push_back(finish(e));
  }

  // Colored shapes, from segments (linear kinds) and uniform structures
  // (arch, L-shape). Ordinals only over linear runs, counted from the
  // canonical end.
  for (const Segment& seg : detect_segments(scene)) {
    for (StructureKind kind :
         {StructureKind::Column, StructureKind::Row, StructureKind::Bar}) {
      StructureRef ref{kind, seg.color.name};
      const auto bindings = resolve_reference(ref, scene);
      bool is_this = false;
      for (const auto& b : bindings)
        if (ids_of(b.members) == ids_of(seg.blocks)) is_this = true;
      if (!is_this) continue;

      RefExpr shape;
      shape.form = ExprForm::ColorShape;
      shape.color = seg.color.name;
      shape.reference = ref;
      shape.intended = ids_of(seg.blocks);
      candidates.push_back(finish(shape));

      const int n = std::min<int>(static_cast<int>(seg.blocks.size()),
                                  static_cast<int>(ordinal_words().size()));
      for (int k = 1; k <= n; ++k) {
        RefExpr ord;
        ord.form = ExprForm::OrdinalInShape;
        ord.ordinal = k;
        ord.color = seg.color.name;
        ord.reference = ref;
        const auto den = denote(ord, scene, camera);
        if (den.size() != 1) continue;  // ambiguous across same-color runs
        ord.intended = den;
        candidates.push_back(finish(ord));
      }
    }
  }
  for (const Structure& s : detect_structures(scene)) {
    if ((s.kind != StructureKind::Arch && s.kind != StructureKind::LShape) || !s.color)
      continue;
    RefExpr e;
    e.form = ExprForm::ColorShape;
    e.color = *s.color;
    e.reference = StructureRef{s.kind, *s.color};
    e.intended = s.member_ids;
    candidates.push_back(finish(e));
  }

  std::vector<RefExpr> unique_ok;
  std::vector<std::string> seen;
  for (const RefExpr& e : candidates) {
    if (std::find(seen.begin(), seen.end(), e.surface) != seen.end()) continue;
    seen.push_back(e.surface);
    if (is_unambiguous(e, scene, camera)) unique_ok.push_back(e);
  }
  return unique_ok;
}

std::vector<RefExpr> generate_template_expressions(const Scene& scene, const CameraPose& camera,
                                                   int budget, std::uint64_t seed) {
  if (budget < 1) throw NoExpressible("budget must be >= 1");
  const std::vector<RefExpr> pool = enumerate_template_expressions(scene, camera);
  if (pool.empty()) throw NoExpressible("scene admits no unambiguous template expression");

  std::array<std::vector<RefExpr>, 3> by_form;
  for (const RefExpr& e : pool) {
    switch (e.form) {
      case ExprForm::ColorPlural: by_form[0].push_back(e); break;
      case ExprForm::ColorShape: by_form[1].push_back(e); break;
      default: by_form[2].push_back(e); break;
    }
  }

  Rng rng(seed);
  for (auto& bucket : by_form) rng.shuffle(bucket);

  // Round-robin over non-empty form buckets keeps per-form counts within one
  // of each other while the budget lasts.
  std::vector<RefExpr> out;
  std::array<std::size_t, 3> cursor{0, 0, 0};
  bool progressed = true;
  while (static_cast<int>(out.size()) < budget && progressed) {
    progressed = false;
    for (std::size_t f = 0; f < 3 && static_cast<int>(out.size()) < budget; ++f) {
      if (cursor[f] < by_form[f].size()) {
        out.push_back(by_form[f][cursor[f]++]);
        progressed = true;
      }
    }
  }
  return out;
}

Dialogue single_mention_dialogue(const std::string& surface) {
  Dialogue d;
  DialogueTurn turn;
  turn.speaker = Speaker::Architect;
  turn.text = surface;
  turn.mentions.push_back({0, static_cast<int>(surface.size()), "c0"});
  d.turns.push_back(turn);
  d.chains.push_back({"c0", {{0, 0, static_cast<int>(surface.size())}}, true});
  d.final_mention = {0, 0, static_cast<int>(surface.size()), "c0"};
  return d;
}

TrainingSample build_short_sample_with(const RefExpr& expr,
                                       const std::vector<AnnotationTriplet>& annotations,
                                       const std::string& scene_id, std::uint64_t seed,
                                       const std::string& sample_id) {
  TrainingSample s;
  s.sample_id = sample_id.empty() ? scene_id + ":" + expr.surface : sample_id;
  s.dialogue = single_mention_dialogue(expr.surface);
  s.tier = Tier::Template;
  s.provenance = {"tier1-template", seed, ""};
  for (const BlockId& id : expr.intended) {
    const AnnotationTriplet* found = nullptr;
    for (const auto& a : annotations)
      if (a.id == id) found = &a;
    if (found == nullptr)
      throw TargetInvisible("intended block " + id.str() + " is not visible");
    s.targets.push_back({id, found->bbox});
  }
  return s;
}

TrainingSample build_short_sample(const RefExpr& expr, const Scene& scene,
                                  const CameraPose& camera, const std::string& sample_id) {
  return build_short_sample_with(expr, annotate(scene, camera), scene.scene_id, scene.seed,
                                 sample_id);
}

}  // namespace grec
