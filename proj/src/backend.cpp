#include "grec/backend.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "grec/error.hpp"
#include "grec/png_io.hpp"
#include "grec/tier2.hpp"

namespace grec {

namespace {

using nlohmann::json;

Vec3 center_of(const Block& b) {
  return {b.coord.x + 0.5, b.coord.y + 0.5, b.coord.z + 0.5};
}

std::vector<StructureRef> candidate_references(const Scene& scene, const Block& target) {
  std::vector<StructureRef> refs;
  auto add = [&](StructureRef r) {
    if (std::find(refs.begin(), refs.end(), r) == refs.end()) refs.push_back(r);
  };
  for (const Segment& seg : detect_segments(scene)) {
    bool has = false;
    for (const Block& b : seg.blocks) has |= b.id == target.id;
    if (!has) continue;
    for (StructureKind kind :
         {StructureKind::Column, StructureKind::Row, StructureKind::Bar}) {
      const int len = static_cast<int>(seg.blocks.size());
      const bool match =
          (kind == StructureKind::Column && seg.axis == Axis::Vertical && len >= 2) ||
          (kind == StructureKind::Row && seg.axis != Axis::Vertical && len == kGridX) ||
          (kind == StructureKind::Bar && seg.axis != Axis::Vertical && len >= 3 &&
           len < kGridX);
      if (match) add({kind, seg.color.name});
    }
  }
  for (const Structure& s : detect_structures(scene)) {
    if (std::find(s.member_ids.begin(), s.member_ids.end(), target.id) == s.member_ids.end())
      continue;
    if (s.kind == StructureKind::ScatterGroup) {
      add({s.kind, *s.color});
    } else {
      if (s.color) add({s.kind, s.color});
      add({s.kind, std::nullopt});
    }
  }
  return refs;
}

}  // namespace

std::optional<RefExpr> rule_expression_for(const Scene& scene, const CameraPose& camera,
                                           const BlockId& target) {
  const Block* block = scene.find(target);
  if (block == nullptr) return std::nullopt;

  for (const StructureRef& ref : candidate_references(scene, *block)) {
    for (const Binding& binding : resolve_reference(ref, scene)) {
      bool contains = false;
      for (const Block& m : binding.members) contains |= m.id == target;
      if (!contains) continue;

      std::vector<Block> colored;
      for (const Block& m : binding.members)
        if (m.color.name == block->color.name) colored.push_back(m);

      Vec3 centroid{0, 0, 0};
      for (const Block& m : binding.members) centroid = centroid + center_of(m);
      centroid = centroid * (1.0 / static_cast<double>(binding.members.size()));
      const Vec3 cam_to_target = center_of(*block) - camera.position;
      const Vec3 cam_to_centroid = centroid - camera.position;
      const Perspective persp = cam_to_target.norm() <= cam_to_centroid.norm()
                                    ? Perspective::CloseToYou
                                    : Perspective::FarFromYou;

      // pattern (ii): a direction where the target's rank is unique
      for (Position pos : {Position::Top, Position::Bottom, Position::Left, Position::Right,
                           Position::Front, Position::Back}) {
        auto key = [&](const Block& b) {
          switch (pos) {
            case Position::Top: return -static_cast<double>(b.coord.y);
            case Position::Bottom: return static_cast<double>(b.coord.y);
            case Position::Left:
            case Position::Right: {
              const Vec3 cs = camera.to_camera(center_of(b));
              double px = 0, py = 0;
              if (cs.z > 1e-6) camera.project(cs, px, py);
              return pos == Position::Left ? px : -px;
            }
            case Position::Front: return camera.to_camera(center_of(b)).z;
            case Position::Back: return -camera.to_camera(center_of(b)).z;
          }
          return 0.0;
        };
        const double tk = key(*block);
        int before = 0;
        bool tied = false;
        for (const Block& m : colored) {
          if (m.id == target) continue;
          const double k = key(m);
          if (k < tk) ++before;
          if (k == tk) tied = true;
        }
        if (tied) continue;
        const int rank = before + 1;
        if (rank > static_cast<int>(ordinal_words().size())) continue;
        RefExpr e;
        e.form = ExprForm::CanonicalII;
        e.ordinal = rank;
        e.color = block->color.name;
        e.position = pos;
        e.reference = ref;
        e.perspective = persp;
        e.intended = {target};
        e.surface = render_surface(e);
        if (is_unambiguous(e, scene, camera)) return e;
      }

      // pattern (i): target is the unique center of the reference
      {
        const Block* best = nullptr;
        double best_d = 0;
        bool tie = false;
        for (const Block& m : colored) {
          const Vec3 d = center_of(m) - centroid;
          const double dist = d.dot(d);
          if (best == nullptr || dist < best_d) {
            best = &m;
            best_d = dist;
            tie = false;
          } else if (dist == best_d) {
            tie = true;
          }
        }
        if (best != nullptr && !tie && best->id == target) {
          RefExpr e;
          e.form = ExprForm::CanonicalI;
          e.color = block->color.name;
          e.reference = ref;
          e.perspective = persp;
          e.intended = {target};
          e.surface = render_surface(e);
          if (is_unambiguous(e, scene, camera)) return e;
        }
      }
    }
  }
  return std::nullopt;
}

RefExpr null_expression_for(const Scene& scene) {
  for (StructureKind kind : {StructureKind::Arch, StructureKind::LShape, StructureKind::Column,
                             StructureKind::Row, StructureKind::Bar}) {
    for (const BlockColor& c : default_palette()) {
      StructureRef ref{kind, c.name};
      if (!resolve_reference(ref, scene).empty()) continue;
      RefExpr e;
      e.form = ExprForm::CanonicalII;
      e.ordinal = 1;
      e.color = c.name;
      e.position = Position::Top;
      e.reference = ref;
      e.perspective = Perspective::CloseToYou;
      e.surface = render_surface(e);
      return e;
    }
  }
  // Unreachable in practice: a scene holding every colored shape. Out-of-range
  // ordinal over the first binding still denotes nothing.
  RefExpr e;
  e.form = ExprForm::CanonicalII;
  e.ordinal = static_cast<int>(ordinal_words().size());
  e.color = default_palette()[0].name;
  e.position = Position::Top;
  e.reference = StructureRef{StructureKind::Arch, default_palette()[0].name};
  e.perspective = Perspective::CloseToYou;
  e.surface = render_surface(e);
  return e;
}

DeterministicRuleBackend::DeterministicRuleBackend(const Scene& scene, const CameraPose& camera,
                                                   const RenderOptions& options,
                                                   double crop_margin)
    : scene_(scene), camera_(camera) {
  const RenderedImage image = render(scene, camera, options);
  for (const AnnotationTriplet& a : annotate(scene, camera, options)) {
    RenderedImage crop = make_crop(image, a, crop_margin);
    crops_.push_back({a.id, crop.width, crop.height, std::move(crop.pixels)});
  }
}

std::string DeterministicRuleBackend::complete(const std::string& prompt,
                                               const std::vector<RenderedImage>& images) {
  (void)prompt;
  const RenderedImage* crop = images.size() >= 2 ? &images[1] : nullptr;
  std::optional<BlockId> target;
  if (crop != nullptr) {
    for (const auto& c : crops_) {
      if (c.width == crop->width && c.height == crop->height && c.pixels == crop->pixels) {
        target = c.id;
        break;
      }
    }
  }
  json reply;
  if (!target) {
    reply["id"] = "A1";
    reply["expression"] = null_expression_for(scene_).surface;
    return reply.dump();
  }
  const auto expr = rule_expression_for(scene_, camera_, *target);
  reply["id"] = target->str();
  reply["expression"] = expr ? expr->surface : null_expression_for(scene_).surface;
  return reply.dump();
}

AdversarialMockBackend::AdversarialMockBackend(std::shared_ptr<GeneratorBackend> inner,
                                               const Scene& scene, const CameraPose& camera,
                                               std::uint64_t seed, double malformed_rate,
                                               double id_flip_rate, double ambiguous_rate)
    : inner_(std::move(inner)),
      scene_(scene),
      camera_(camera),
      rng_(seed),
      malformed_rate_(malformed_rate),
      id_flip_rate_(id_flip_rate),
      ambiguous_rate_(ambiguous_rate) {}

std::string AdversarialMockBackend::complete(const std::string& prompt,
                                             const std::vector<RenderedImage>& images) {
  const std::string truthful = inner_->complete(prompt, images);
  std::lock_guard<std::mutex> lock(mutex_);
  const double u = rng_.uniform_real();
  if (u < malformed_rate_) {
    return "the target is { probably somewhere on the left";
  }
  json parsed = json::parse(truthful, nullptr, false);
  if (parsed.is_discarded() || !parsed.contains("id")) return truthful;
  const auto claimed = parse_block_id(parsed["id"].get<std::string>());
  if (!claimed) return truthful;

  std::vector<BlockId> ids;
  for (const Block& b : scene_.blocks) ids.push_back(b.id);
  std::sort(ids.begin(), ids.end());

  if (u < malformed_rate_ + id_flip_rate_) {
    BlockId flipped = *claimed;
    if (ids.size() > 1) {
      const auto it = std::find(ids.begin(), ids.end(), *claimed);
      const std::size_t at = it == ids.end() ? 0 : (it - ids.begin() + 1) % ids.size();
      flipped = ids[at];
    } else {
      flipped.letter = flipped.letter == 'Z' ? 'A' : static_cast<char>(flipped.letter + 1);
    }
    parsed["id"] = flipped.str();
    return parsed.dump();
  }
  if (u < malformed_rate_ + id_flip_rate_ + ambiguous_rate_) {
    // Keep the truthful id but swap in an expression that singles out a
    // different block, so unique-denotation verification fails.
    const auto it = std::find(ids.begin(), ids.end(), *claimed);
    const std::size_t at = it == ids.end() ? 0 : static_cast<std::size_t>(it - ids.begin());
    for (std::size_t step = 1; step < ids.size(); ++step) {
      const BlockId other = ids[(at + step) % ids.size()];
      if (const auto expr = rule_expression_for(scene_, camera_, other)) {
        parsed["expression"] = expr->surface;
        return parsed.dump();
      }
    }
    parsed["expression"] = null_expression_for(scene_).surface;
    return parsed.dump();
  }
  if (rng_.chance(0.5)) {
    return "Reasoning: the crop shows the labeled target block inside its structure; "
           "re-checking the scene view confirms the slots.\nFinal answer: " +
           truthful;
  }
  return truthful;
}

RemoteHttpBackend::RemoteHttpBackend(std::string url, std::string token,
                                     std::vector<int> backoff_ms)
    : url_(std::move(url)), token_(std::move(token)), backoff_ms_(std::move(backoff_ms)) {}

std::unique_ptr<RemoteHttpBackend> RemoteHttpBackend::from_env() {
  const char* url = std::getenv("GRECSYNTH_BACKEND_URL");
  if (url == nullptr || *url == '\0')
    throw BackendUnavailable("GRECSYNTH_BACKEND_URL is not set");
  const char* token = std::getenv("GRECSYNTH_BACKEND_TOKEN");
  return std::make_unique<RemoteHttpBackend>(url, token ? token : "");
}

std::string RemoteHttpBackend::complete(const std::string& prompt,
                                        const std::vector<RenderedImage>& images) {
  // split scheme://host:port and path
  std::string base = url_, path = "/";
  const auto scheme_end = url_.find("://");
  if (scheme_end != std::string::npos) {
    const auto slash = url_.find('/', scheme_end + 3);
    if (slash != std::string::npos) {
      base = url_.substr(0, slash);
      path = url_.substr(slash);
    }
  }

  json req;
  req["prompt"] = prompt;
  req["images"] = json::array();
  for (const RenderedImage& img : images) req["images"].push_back(base64_encode(encode_png(img)));
  const std::string body = req.dump();

  std::string last_error = "no attempt made";
  for (std::size_t attempt = 0; attempt <= backoff_ms_.size(); ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms_[attempt - 1]));
    httplib::Client client(base);
    client.set_read_timeout(60, 0);
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
    auto res = client.Post(path, headers, body, "application/json");
    if (res && res->status == 200) return res->body;
    last_error = res ? "http status " + std::to_string(res->status)
                     : "transport error " + httplib::to_string(res.error());
  }
  throw BackendUnavailable("backend " + url_ + " unreachable: " + last_error);
}

}  // namespace grec
