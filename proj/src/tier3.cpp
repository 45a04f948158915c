#include "grec/tier3.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "grec/error.hpp"
#include "grec/rng.hpp"
#include "grec/tier1.hpp"

namespace grec {

namespace {

using nlohmann::json;

std::vector<PixelBBox> aligned_boxes(const std::vector<BlockId>& sorted_ids,
                                     const std::vector<AnnotationTriplet>& annotations,
                                     bool* all_visible) {
  std::vector<PixelBBox> boxes;
  *all_visible = true;
  for (const BlockId& id : sorted_ids) {
    const AnnotationTriplet* found = nullptr;
    for (const auto& a : annotations)
      if (a.id == id) found = &a;
    if (found == nullptr) {
      *all_visible = false;
      return {};
    }
    boxes.push_back(found->bbox);
  }
  return boxes;
}

std::optional<SubstructureExpr> substructure_for_members(
    const Scene& scene, const CameraPose& camera, const Structure& s,
    const std::vector<AnnotationTriplet>& annotations) {
  bool all_visible = false;
  const auto boxes = aligned_boxes(s.member_ids, annotations, &all_visible);
  if (!all_visible) return std::nullopt;

  std::vector<RefExpr> attempts;
  if (s.color && s.kind != StructureKind::ScatterGroup) {
    RefExpr e;
    e.form = ExprForm::ColorShape;
    e.color = *s.color;
    e.reference = StructureRef{s.kind, *s.color};
    e.intended = s.member_ids;
    attempts.push_back(e);
  }
  if (s.color) {
    RefExpr e;
    e.form = ExprForm::ColorPlural;
    e.color = *s.color;
    e.plural = s.member_ids.size() > 1;
    e.intended = s.member_ids;
    attempts.push_back(e);
  }
  for (RefExpr& e : attempts) {
    e.surface = render_surface(e);
    if (is_unambiguous(e, scene, camera)) return SubstructureExpr{e, s.member_ids, boxes};
  }
  return std::nullopt;
}

}  // namespace

DecomposeResult decompose(const Scene& scene, const CameraPose& camera) {
  DecomposeResult result;
  const auto annotations = annotate(scene, camera);
  std::set<BlockId> visible;
  for (const auto& a : annotations) visible.insert(a.id);
  std::set<BlockId> covered;

  for (const Structure& s : detect_structures(scene)) {
    bool any_visible = false;
    for (const BlockId& id : s.member_ids) any_visible |= visible.count(id) > 0;
    if (!any_visible) continue;
    if (const auto sub = substructure_for_members(scene, camera, s, annotations)) {
      for (const BlockId& id : sub->member_ids) covered.insert(id);
      result.substructures.push_back(*sub);
      continue;
    }
    // No whole-set expression: single the members out one by one.
    for (const BlockId& id : s.member_ids) {
      if (visible.count(id) == 0) continue;
      const auto expr = rule_expression_for(scene, camera, id);
      if (!expr) continue;
      bool ok = false;
      auto boxes = aligned_boxes({id}, annotations, &ok);
      if (!ok) continue;
      result.substructures.push_back({*expr, {id}, std::move(boxes)});
      covered.insert(id);
    }
  }
  for (const BlockId& id : visible)
    if (covered.count(id) == 0) result.uncovered.push_back(id);
  return result;
}

DecomposeResult decompose_with_backend(const Scene& scene, const CameraPose& camera,
                                       GeneratorBackend& backend) {
  const auto annotations = annotate(scene, camera);
  const RenderedImage image = render(scene, camera);
  std::ostringstream os;
  os << "Decompose the pictured block scene into its distinct substructures.\n"
     << "Every visible block id must belong to exactly one substructure. For each\n"
     << "substructure give a referring expression from the toolkit grammar that\n"
     << "denotes exactly its member blocks.\n"
     << "Respond with only JSON: {\"substructures\": [{\"ids\": [\"A1\", ...], "
        "\"expression\": \"...\"}]}\n";
  const std::string raw = backend.complete(os.str(), {image});

  DecomposeResult result;
  std::set<BlockId> visible;
  for (const auto& a : annotations) visible.insert(a.id);
  std::set<BlockId> covered;

  const json parsed = json::parse(raw, nullptr, false);
  if (parsed.is_discarded() || !parsed.contains("substructures"))
    throw SchemaMismatch("backend decomposition is not the expected JSON");
  std::vector<std::string> colors;
  for (const BlockColor& c : default_palette()) colors.push_back(c.name);
  for (const auto& item : parsed["substructures"]) {
    if (!item.contains("ids") || !item.contains("expression")) continue;
    std::vector<BlockId> ids;
    bool ids_ok = true;
    for (const auto& idj : item["ids"]) {
      const auto id = parse_block_id(idj.get<std::string>());
      if (!id || visible.count(*id) == 0) {
        ids_ok = false;
        break;
      }
      ids.push_back(*id);
    }
    if (!ids_ok || ids.empty()) continue;
    std::sort(ids.begin(), ids.end());
    auto expr = parse_surface(item["expression"].get<std::string>(), colors);
    if (!expr) continue;
    expr->intended = ids;
    if (!is_unambiguous(*expr, scene, camera)) continue;
    bool ok = false;
    auto boxes = aligned_boxes(ids, annotations, &ok);
    if (!ok) continue;
    for (const BlockId& id : ids) covered.insert(id);
    result.substructures.push_back({*expr, std::move(ids), std::move(boxes)});
  }
  for (const BlockId& id : visible)
    if (covered.count(id) == 0) result.uncovered.push_back(id);
  return result;
}

namespace {

const char* pronoun_for(const SubstructureExpr& s) {
  return s.member_ids.size() > 1 ? "them" : "it";
}

struct DialogueBuilder {
  Dialogue d;
  std::map<std::string, Chain> chains;

  void add_turn(Speaker speaker, const std::string& text,
                const std::vector<Mention>& mentions = {}) {
    DialogueTurn turn;
    turn.speaker = speaker;
    turn.text = text;
    turn.mentions = mentions;
    const int turn_index = static_cast<int>(d.turns.size());
    for (const Mention& m : mentions) {
      chains[m.chain_id].chain_id = m.chain_id;
      chains[m.chain_id].mentions.push_back({turn_index, m.start, m.end});
    }
    d.turns.push_back(std::move(turn));
  }

  Dialogue finish(const std::string& final_chain) {
    for (auto& [id, chain] : chains) {
      chain.singleton = chain.mentions.size() < 2;
      d.chains.push_back(chain);
    }
    std::sort(d.chains.begin(), d.chains.end(),
              [](const Chain& a, const Chain& b) { return a.chain_id < b.chain_id; });
    const Chain* target = nullptr;
    for (const auto& c : d.chains)
      if (c.chain_id == final_chain) target = &c;
    const MentionRef last = target->mentions.back();
    d.final_mention = {last.turn, last.start, last.end, final_chain};
    return d;
  }
};

Mention tail_mention(const std::string& prefix, const std::string& text,
                     const std::string& chain) {
  return {static_cast<int>(prefix.size()), static_cast<int>(text.size()), chain};
}

}  // namespace

Dialogue compose_dialogue(const std::vector<SubstructureExpr>& substructures,
                          const SubstructureExpr& target, std::uint64_t seed) {
  bool target_present = false;
  for (const auto& s : substructures)
    target_present |= s.member_ids == target.member_ids && s.expr.surface == target.expr.surface;
  if (!target_present) throw CompositionRejected("target is not one of the substructures");

  Rng rng(seed);
  const int total_turns = static_cast<int>(rng.uniform_int(4, 10));
  const bool trailing = total_turns % 2 == 1;
  int rem = total_turns - 4 - (trailing ? 1 : 0);
  bool clarify = false;
  if (rem >= 2 && rng.chance(0.5)) {
    clarify = true;
    rem -= 2;
  }
  int context_pairs = rem / 2;

  std::vector<const SubstructureExpr*> others;
  for (const auto& s : substructures)
    if (s.expr.surface != target.expr.surface) others.push_back(&s);

  const std::vector<std::string> context_openers = {"Let's start with ", "First, look at ",
                                                    "You can leave ", "Don't touch "};
  const std::vector<std::string> context_tails = {" for now.", " as it is.", " alone.", "."};
  const std::vector<std::string> acks = {"Okay.", "Got it.", "Sure.", "Done."};
  const std::vector<std::string> intros = {"Now find ", "Next, find ", "Now I need ",
                                           "Alright, focus on "};
  const std::vector<std::string> moves = {" one space to the left.", " one space to the right.",
                                          " one space forward.", " up by one."};

  DialogueBuilder b;
  const std::string target_chain = "t0";
  int context_chain = 0;
  const std::string pron = pronoun_for(target);

  for (int i = 0; i < context_pairs; ++i) {
    if (!others.empty()) {
      const SubstructureExpr* o = others[static_cast<std::size_t>(i) % others.size()];
      const std::string opener = rng.pick(context_openers);
      // context phrases embed the expression without its final period
      const std::string phrase = o->expr.surface.substr(0, o->expr.surface.size() - 1);
      const std::string tail = rng.pick(context_tails);
      const std::string chain = "c" + std::to_string(context_chain++);
      const std::string text = opener + phrase + tail;
      b.add_turn(Speaker::Architect, text,
                 {{static_cast<int>(opener.size()),
                   static_cast<int>(opener.size() + phrase.size()), chain}});
    } else {
      b.add_turn(Speaker::Architect, "We keep building on the same grid.");
    }
    b.add_turn(Speaker::Builder, rng.pick(acks));
  }

  {
    const std::string intro = rng.pick(intros);
    const std::string text = intro + target.expr.surface;
    b.add_turn(Speaker::Architect, text, {tail_mention(intro, text, target_chain)});
  }
  if (clarify) {
    b.add_turn(Speaker::Builder, "Which one do you mean?");
    const std::string again = "I mean ";
    const std::string text = again + target.expr.surface;
    b.add_turn(Speaker::Architect, text, {tail_mention(again, text, target_chain)});
  }
  b.add_turn(Speaker::Builder, rng.pick(acks));
  {
    const std::string head = "Move ";
    const std::string text = head + pron + rng.pick(moves);
    b.add_turn(Speaker::Architect, text,
               {{static_cast<int>(head.size()),
                 static_cast<int>(head.size() + std::string(pron).size()), target_chain}});
  }
  {
    const std::string head = "Done, I moved ";
    const std::string text = head + pron + ".";
    b.add_turn(Speaker::Builder, text,
               {{static_cast<int>(head.size()),
                 static_cast<int>(head.size() + std::string(pron).size()), target_chain}});
  }
  if (trailing) {
    const std::string head = "Good, leave ";
    const std::string text = head + pron + " there.";
    b.add_turn(Speaker::Architect, text,
               {{static_cast<int>(head.size()),
                 static_cast<int>(head.size() + std::string(pron).size()), target_chain}});
  }
  return b.finish(target_chain);
}

namespace {

// Mentions for backend dialogues are located textually: the antecedent is
// the target expression as a substring, anaphors are pronoun words after it.
std::optional<std::pair<int, int>> find_span(const std::string& text, const std::string& needle,
                                             int from = 0) {
  const auto at = text.find(needle, static_cast<std::size_t>(from));
  if (at == std::string::npos) return std::nullopt;
  return std::make_pair(static_cast<int>(at), static_cast<int>(at + needle.size()));
}

std::optional<std::pair<int, int>> find_pronoun(const std::string& text) {
  for (const char* p : {"it", "them", "those"}) {
    const std::string needle = p;
    std::size_t at = 0;
    while ((at = text.find(needle, at)) != std::string::npos) {
      const bool left_ok = at == 0 || !std::isalpha(static_cast<unsigned char>(text[at - 1]));
      const std::size_t end = at + needle.size();
      const bool right_ok =
          end == text.size() || !std::isalpha(static_cast<unsigned char>(text[end]));
      if (left_ok && right_ok)
        return std::make_pair(static_cast<int>(at), static_cast<int>(end));
      ++at;
    }
  }
  return std::nullopt;
}

}  // namespace

Dialogue compose_dialogue_with_backend(const std::vector<SubstructureExpr>& substructures,
                                       const SubstructureExpr& target,
                                       GeneratorBackend& backend) {
  std::ostringstream os;
  os << "Write a short architect/builder block-building dialogue of 4 to 10 turns,\n"
     << "strictly alternating speakers and starting with the Architect. Introduce the\n"
     << "target \"" << target.expr.surface << "\" verbatim in an early Architect turn,\n"
     << "then refer back to it only with a pronoun (it/them/those); the last mention\n"
     << "must be such a pronoun. Other structures you may mention: ";
  for (const auto& s : substructures)
    if (s.expr.surface != target.expr.surface) os << "\"" << s.expr.surface << "\" ";
  os << "\nRespond with only JSON: {\"turns\": [{\"speaker\": \"Architect\"|\"Builder\", "
        "\"text\": \"...\"}]}\n";
  const std::string raw = backend.complete(os.str(), {});

  const json parsed = json::parse(raw, nullptr, false);
  if (parsed.is_discarded() || !parsed.contains("turns") || !parsed["turns"].is_array())
    throw CompositionRejected("backend reply is not the expected JSON");
  const auto& turns = parsed["turns"];
  if (turns.size() < 4 || turns.size() > 10)
    throw CompositionRejected("turn count outside 4..10");

  DialogueBuilder b;
  const std::string target_chain = "t0";
  int antecedent_turn = -1;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const auto& t = turns[i];
    if (!t.contains("speaker") || !t.contains("text"))
      throw CompositionRejected("turn missing speaker or text");
    const std::string speaker = t["speaker"].get<std::string>();
    const Speaker expected = i % 2 == 0 ? Speaker::Architect : Speaker::Builder;
    if (speaker != speaker_name(expected))
      throw CompositionRejected("speakers do not alternate starting with Architect");
    const std::string text = t["text"].get<std::string>();
    std::vector<Mention> mentions;
    if (antecedent_turn < 0) {
      if (const auto span = find_span(text, target.expr.surface)) {
        mentions.push_back({span->first, span->second, target_chain});
        antecedent_turn = static_cast<int>(i);
      }
    } else if (const auto span = find_pronoun(text)) {
      mentions.push_back({span->first, span->second, target_chain});
    }
    b.add_turn(expected, text, mentions);
  }
  if (antecedent_turn < 0)
    throw CompositionRejected("target expression never introduced verbatim");
  const Chain& chain = b.chains[target_chain];
  if (chain.mentions.size() < 2)
    throw CompositionRejected("no anaphoric mention after the antecedent");
  const MentionRef& last = chain.mentions.back();
  const std::string last_text = turns[static_cast<std::size_t>(last.turn)]["text"];
  if (last_text.substr(static_cast<std::size_t>(last.start),
                       static_cast<std::size_t>(last.end - last.start)) ==
      target.expr.surface)
    throw CompositionRejected("final mention is not an anaphor");
  return b.finish(target_chain);
}

TrainingSample integrate_sample(const Dialogue& dialogue, const SubstructureExpr& substructure,
                                const std::string& sample_id, std::uint64_t seed,
                                const std::string& backend_descriptor) {
  if (substructure.member_bboxes.size() != substructure.member_ids.size())
    throw MisalignedTargets("member box list does not align with member ids");
  const Chain* chain = dialogue.find_chain(dialogue.final_mention.chain_id);
  if (chain == nullptr || chain->mentions.empty())
    throw CompositionRejected("final mention chain missing");
  const std::string antecedent = dialogue.mention_text(chain->mentions.front());
  if (antecedent != substructure.expr.surface)
    throw CompositionRejected("final mention does not resolve to the substructure");

  TrainingSample s;
  s.sample_id = sample_id;
  s.dialogue = dialogue;
  for (std::size_t i = 0; i < substructure.member_ids.size(); ++i)
    s.targets.push_back({substructure.member_ids[i], substructure.member_bboxes[i]});
  s.tier = Tier::Dialogue;
  s.provenance = {"tier3-dialogue", seed, backend_descriptor};
  return s;
}

}  // namespace grec
