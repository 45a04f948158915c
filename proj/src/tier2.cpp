#include "grec/tier2.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "grec/error.hpp"
#include "grec/tier1.hpp"

namespace grec {

namespace {
using nlohmann::json;
}

const char* reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::SchemaError: return "SchemaError";
    case RejectReason::IdMismatch: return "IdMismatch";
    case RejectReason::GrammarError: return "GrammarError";
    case RejectReason::AmbiguousDenotation: return "AmbiguousDenotation";
    case RejectReason::EmptyDenotation: return "EmptyDenotation";
  }
  return "?";
}

RenderedImage make_crop(const RenderedImage& image, const AnnotationTriplet& target,
                        double margin_fraction) {
  if (margin_fraction < 0.0 || margin_fraction > 1.0)
    throw DegenerateCrop("margin_fraction outside [0, 1]");
  const PixelBBox& b = target.bbox;
  int x0 = static_cast<int>(std::floor(b.x - margin_fraction * b.w));
  int y0 = static_cast<int>(std::floor(b.y - margin_fraction * b.h));
  int x1 = static_cast<int>(std::ceil(b.x + b.w + margin_fraction * b.w));
  int y1 = static_cast<int>(std::ceil(b.y + b.h + margin_fraction * b.h));
  x0 = std::max(0, x0);
  y0 = std::max(0, y0);
  x1 = std::min(image.width, x1);
  y1 = std::min(image.height, y1);
  const int w = x1 - x0, h = y1 - y0;
  if (w <= 0 || h <= 0 || w * h < 64)
    throw DegenerateCrop("crop area below 64 px^2");
  RenderedImage crop;
  crop.width = w;
  crop.height = h;
  crop.scene_id = image.scene_id;
  crop.camera = image.camera;
  crop.pixels.resize(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    const std::size_t src = (static_cast<std::size_t>(y0 + y) * image.width + x0) * 3;
    const std::size_t dst = static_cast<std::size_t>(y) * w * 3;
    std::copy(image.pixels.begin() + src, image.pixels.begin() + src + w * 3,
              crop.pixels.begin() + dst);
  }
  return crop;
}

std::string build_prompt(const RenderedImage& scene_image, const RenderedImage& crop,
                         const std::string& schema_version) {
  std::ostringstream os;
  os << "You are labeling blocks in a simulated block-building scene.\n"
     << "You receive two images. The first is the full scene ("
     << scene_image.width << "x" << scene_image.height
     << "). The second is a tight crop centered on one target block ("
     << crop.width << "x" << crop.height << ").\n"
     << "\n"
     << "Tasks:\n"
     << "1. Read the target block's identifier from the crop. Identifiers are an\n"
     << "   uppercase letter followed by digits, e.g. A1, stamped on the block face.\n"
     << "2. Compose a single referring expression that uniquely localizes the target\n"
     << "   inside the full scene.\n"
     << "\n"
     << "The expression must instantiate exactly one of these two patterns, each\n"
     << "ending with a period:\n"
     << "(i) the center <color> block of the <reference>, <perspective>.\n"
     << "(ii) the <ordinal> <color> block from the <position> of the <reference>, "
        "<perspective>.\n"
     << "\n"
     << "Slot constraints:\n"
     << "- reference: a noun phrase naming the larger structure containing the target.\n"
     << "  Allowed: [<color>] column, [<color>] row, [<color>] bar, [<color>] arch,\n"
     << "  [<color>] L-shape, scattered <color> blocks.\n"
     << "- position: one of top, bottom, left, right, front, back.\n"
     << "- ordinal: one of first, second, third, fourth, fifth, sixth, seventh,\n"
     << "  eighth, ninth, tenth, eleventh.\n"
     << "- color: one of red, orange, yellow, green, blue, purple, white.\n"
     << "- perspective: one of \"close to you\", \"far from you\", relative to the\n"
     << "  builder's viewpoint in the full scene.\n"
     << "\n"
     << "Reason step by step internally about the crop, the scene and the slots, but\n"
     << "emit ONLY the final JSON object, nothing else.\n"
     << "\n"
     << "Output schema (" << schema_version << "):\n"
     << "{\"id\": \"<letter><digits>\", \"expression\": \"<pattern (i) or (ii)>\"}\n"
     << "The id field is checked against the block we selected; answers naming any\n"
     << "other id are discarded.\n";
  return os.str();
}

namespace {

// Last balanced {...} span that parses as a JSON object; tolerates leaked
// text around the answer.
std::optional<json> extract_last_json(const std::string& raw) {
  for (std::size_t end = raw.size(); end-- > 0;) {
    if (raw[end] != '}') continue;
    int depth = 0;
    for (std::size_t start = end + 1; start-- > 0;) {
      if (raw[start] == '}') ++depth;
      if (raw[start] == '{') {
        --depth;
        if (depth == 0) {
          const json parsed =
              json::parse(raw.substr(start, end - start + 1), nullptr, false);
          if (!parsed.is_discarded() && parsed.is_object()) return parsed;
          break;
        }
      }
    }
  }
  return std::nullopt;
}

std::vector<std::string> color_vocabulary(const Scene& scene) {
  std::set<std::string> words;
  for (const BlockColor& c : default_palette()) words.insert(c.name);
  for (const Block& b : scene.blocks) words.insert(b.color.name);
  return {words.begin(), words.end()};
}

}  // namespace

ValidationResult parse_and_validate(const std::string& raw, const AnnotationTriplet& target,
                                    const Scene& scene, const CameraPose& camera) {
  const auto parsed = extract_last_json(raw);
  if (!parsed) return Rejection{RejectReason::SchemaError, "no JSON object in output"};
  if (!parsed->contains("id") || !(*parsed)["id"].is_string() ||
      !parsed->contains("expression") || !(*parsed)["expression"].is_string()) {
    return Rejection{RejectReason::SchemaError, "missing id/expression string fields"};
  }
  const std::string id_text = (*parsed)["id"].get<std::string>();
  const std::string expression = (*parsed)["expression"].get<std::string>();

  const auto claimed = parse_block_id(id_text);
  if (!claimed) return Rejection{RejectReason::SchemaError, "id is not letter+digits: " + id_text};
  if (*claimed != target.id)
    return Rejection{RejectReason::IdMismatch,
                     "claimed " + id_text + ", target " + target.id.str()};

  auto expr = parse_surface(expression, color_vocabulary(scene));
  if (!expr || (expr->form != ExprForm::CanonicalI && expr->form != ExprForm::CanonicalII))
    return Rejection{RejectReason::GrammarError, "not a canonical pattern: " + expression};

  expr->intended = {target.id};
  const auto denotation = denote(*expr, scene, camera);
  if (denotation.empty())
    return Rejection{RejectReason::EmptyDenotation, "denotes nothing: " + expression};
  if (denotation != expr->intended)
    return Rejection{RejectReason::AmbiguousDenotation,
                     "does not uniquely denote " + target.id.str() + ": " + expression};
  return *expr;
}

PromptedResult synthesize_prompted(const Scene& scene, const CameraPose& camera,
                                   GeneratorBackend& backend, int n, std::uint64_t seed,
                                   double crop_margin, const std::string& view_tag) {
  if (n < 1) throw MalformedExpr("synthesize_prompted needs n >= 1");
  PromptedResult result;
  result.stats.total = n;
  const RenderOptions options;
  const RenderedImage image = render(scene, camera, options);
  const auto annotations = annotate(scene, camera, options);
  if (annotations.empty()) return result;

  const std::string stem = view_tag.empty() ? scene.scene_id : scene.scene_id + "-" + view_tag;
  const std::string image_key = "images/" + stem + ".png";
  result.images.emplace(image_key, image);

  Rng rng(seed);
  for (int call = 0; call < n; ++call) {
    const AnnotationTriplet& target = annotations[rng.uniform_index(annotations.size())];
    RenderedImage crop;
    try {
      crop = make_crop(image, target, crop_margin);
    } catch (const DegenerateCrop&) {
      result.stats.counts[RejectReason::SchemaError]++;  // unusable target view
      continue;
    }
    const std::string prompt = build_prompt(image, crop, "schema-v1");
    const std::string raw = backend.complete(prompt, {image, crop});
    const ValidationResult vr = parse_and_validate(raw, target, scene, camera);
    if (std::holds_alternative<Rejection>(vr)) {
      result.stats.counts[std::get<Rejection>(vr).reason]++;
      continue;
    }
    const RefExpr& expr = std::get<RefExpr>(vr);
    TrainingSample s;
    s.sample_id = stem + ":p" + std::to_string(call);
    s.image_ref = image_key;
    s.dialogue = single_mention_dialogue(expr.surface);
    s.targets = {{target.id, target.bbox}};
    s.tier = Tier::Prompted;
    s.provenance = {"tier2-prompted", seed, backend.descriptor()};
    result.samples.push_back(std::move(s));
    result.stats.accepted++;
  }
  return result;
}

}  // namespace grec
