#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "grec/refexpr.hpp"
#include "grec/render.hpp"
#include "grec/rng.hpp"
#include "grec/scene.hpp"

namespace grec {

// Text-completion interface the synthesis tiers drive. Implementations must
// not do I/O other than their own transport; everything else in the pipeline
// stays pure.
class GeneratorBackend {
 public:
  virtual ~GeneratorBackend() = default;
  virtual std::string descriptor() const = 0;
  virtual std::string complete(const std::string& prompt,
                               const std::vector<RenderedImage>& images) = 0;
};

// Builds a canonical (pattern i or ii) expression uniquely denoting the
// target from scene ground truth, or nullopt when the closed grammar cannot
// single the block out.
std::optional<RefExpr> rule_expression_for(const Scene& scene, const CameraPose& camera,
                                           const BlockId& target);

// A grammatical expression guaranteed to denote nothing in this scene; the
// rule backend falls back to it for inexpressible targets so the pipeline
// sees an honest rejection instead of a crash.
RefExpr null_expression_for(const Scene& scene);

// Offline deterministic backend: identifies the target by matching the crop
// against its own render and answers with ground-truth slots, mirroring what
// the prompt asks a remote model to do.
class DeterministicRuleBackend : public GeneratorBackend {
 public:
  DeterministicRuleBackend(const Scene& scene, const CameraPose& camera,
                           const RenderOptions& options = {}, double crop_margin = 0.35);

  std::string descriptor() const override { return "rule"; }
  std::string complete(const std::string& prompt,
                       const std::vector<RenderedImage>& images) override;

 private:
  Scene scene_;
  CameraPose camera_;
  struct CandidateCrop {
    BlockId id;
    int width, height;
    std::vector<std::uint8_t> pixels;
  };
  std::vector<CandidateCrop> crops_;
};

// Wraps another backend and corrupts a seeded fraction of calls: malformed
// JSON, flipped ids, and expressions that fail unique denotation. Used by the
// validation gauntlet.
class AdversarialMockBackend : public GeneratorBackend {
 public:
  AdversarialMockBackend(std::shared_ptr<GeneratorBackend> inner, const Scene& scene,
                         const CameraPose& camera, std::uint64_t seed,
                         double malformed_rate = 0.10, double id_flip_rate = 0.10,
                         double ambiguous_rate = 0.10);

  std::string descriptor() const override { return "mock"; }
  std::string complete(const std::string& prompt,
                       const std::vector<RenderedImage>& images) override;

 private:
  std::shared_ptr<GeneratorBackend> inner_;
  Scene scene_;
  CameraPose camera_;
  Rng rng_;
  double malformed_rate_, id_flip_rate_, ambiguous_rate_;
  std::mutex mutex_;
};

// POSTs {"prompt", "images": [base64 png, ...]} to the endpoint configured
// via GRECSYNTH_BACKEND_URL (bearer token from GRECSYNTH_BACKEND_TOKEN).
// Retries with capped exponential backoff, then throws BackendUnavailable.
class RemoteHttpBackend : public GeneratorBackend {
 public:
  explicit RemoteHttpBackend(std::string url, std::string token = "",
                             std::vector<int> backoff_ms = {1000, 2000, 4000});

  // Reads the environment variables; throws BackendUnavailable when unset.
  static std::unique_ptr<RemoteHttpBackend> from_env();

  std::string descriptor() const override { return "http:" + url_; }
  std::string complete(const std::string& prompt,
                       const std::vector<RenderedImage>& images) override;

 private:
  std::string url_;
  std::string token_;
  std::vector<int> backoff_ms_;
};

}  // namespace grec
