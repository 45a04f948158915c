#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "grec/render.hpp"
#include "grec/scene.hpp"

namespace grec {

enum class Speaker { Architect, Builder };

inline const char* speaker_name(Speaker s) {
  return s == Speaker::Architect ? "Architect" : "Builder";
}

// A mention span inside one turn's text, [start, end) in bytes.
struct Mention {
  int start = 0;
  int end = 0;
  std::string chain_id;
};

struct DialogueTurn {
  Speaker speaker = Speaker::Architect;
  std::string text;
  std::vector<Mention> mentions;  // non-overlapping, in order
};

struct MentionRef {
  int turn = 0;
  int start = 0;
  int end = 0;
  auto operator<=>(const MentionRef&) const = default;
};

struct Chain {
  std::string chain_id;
  std::vector<MentionRef> mentions;  // document order; first is the antecedent
  bool singleton = false;
};

struct FinalMention {
  int turn = 0;
  int start = 0;
  int end = 0;
  std::string chain_id;
};

struct Dialogue {
  std::vector<DialogueTurn> turns;  // alternating, Architect first
  std::vector<Chain> chains;
  FinalMention final_mention;

  std::string mention_text(const MentionRef& m) const {
    return turns[static_cast<std::size_t>(m.turn)].text.substr(
        static_cast<std::size_t>(m.start), static_cast<std::size_t>(m.end - m.start));
  }
  const Chain* find_chain(const std::string& id) const {
    for (const auto& c : chains)
      if (c.chain_id == id) return &c;
    return nullptr;
  }
};

// A single-utterance dialogue holding one referring expression; used by the
// short-expression tiers.
Dialogue single_mention_dialogue(const std::string& surface);

enum class Tier { Template, Prompted, Dialogue };

inline const char* tier_name(Tier t) {
  switch (t) {
    case Tier::Template: return "template";
    case Tier::Prompted: return "prompted";
    case Tier::Dialogue: return "dialogue";
  }
  return "?";
}

struct Provenance {
  std::string generator;
  std::uint64_t seed = 0;
  std::string backend;  // empty when no backend was involved
};

struct TargetBox {
  BlockId id;
  PixelBBox bbox;
};

struct TrainingSample {
  std::string sample_id;
  std::string image_ref;  // dataset-relative path
  Dialogue dialogue;
  std::vector<TargetBox> targets;
  Tier tier = Tier::Template;
  Provenance provenance;
};

// Samples plus the images they reference, keyed by image_ref.
struct SampleSet {
  std::vector<TrainingSample> samples;
  std::map<std::string, RenderedImage> images;
};

}  // namespace grec
