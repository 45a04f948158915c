// Timing comparison between the serial reference path (jobs=1) and the
// OpenMP path for the batch kernels: rendering, letter recovery, template
// synthesis and evaluation. Also asserts both paths agree byte-for-byte.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "grec/eval.hpp"
#include "grec/json_io.hpp"
#include "grec/parallel.hpp"
#include "grec/pipeline.hpp"
#include "grec/rng.hpp"

using namespace grec;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

template <typename Fn>
double timed(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return ms_since(t0);
}

void report(const char* name, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-22s serial %9.1f ms   parallel %9.1f ms   speedup %5.2fx   %s\n", name,
              serial_ms, parallel_ms, serial_ms / parallel_ms,
              identical ? "outputs identical" : "OUTPUT MISMATCH");
}

std::string views_digest(const std::vector<RenderedView>& views) {
  std::string all;
  for (const auto& v : views) {
    all += v.scene_id;
    all.append(reinterpret_cast<const char*>(v.image.pixels.data()),
               v.image.pixels.size());
  }
  return all;
}

std::string set_digest(const SampleSet& set) {
  std::string all;
  for (const auto& s : set.samples) all += sample_to_json(s).dump();
  for (const auto& [k, img] : set.images) {
    all += k;
    all.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  }
  return all;
}

}  // namespace

int main() {
  const int jobs = hardware_jobs();
  std::printf("parallel path uses %d threads\n\n", jobs);

  SceneConfig cfg;
  cfg.min_blocks = 24;
  const auto scenes = gen_scenes(1000, cfg, 24, jobs);
  ViewConfig views;

  {
    std::vector<RenderedView> serial, parallel;
    const double ts = timed([&] { serial = render_batch(scenes, views, true, 1); });
    const double tp = timed([&] { parallel = render_batch(scenes, views, true, jobs); });
    report("render_batch", ts, tp, views_digest(serial) == views_digest(parallel));
  }
  {
    std::vector<RecoveryReport> serial, parallel;
    const double ts = timed([&] { serial = recover_batch(scenes, views, 8, 7, 1); });
    const double tp = timed([&] { parallel = recover_batch(scenes, views, 8, 7, jobs); });
    bool same = serial.size() == parallel.size();
    for (std::size_t i = 0; same && i < serial.size(); ++i) {
      same = serial[i].results.size() == parallel[i].results.size();
      for (std::size_t r = 0; same && r < serial[i].results.size(); ++r)
        same = serial[i].results[r].recovered_letter == parallel[i].results[r].recovered_letter &&
               serial[i].results[r].margin == parallel[i].results[r].margin;
    }
    report("recover_batch", ts, tp, same);
  }
  {
    SampleSet serial, parallel;
    const double ts = timed([&] { serial = synth_template_batch(scenes, views, 30, 5, 1); });
    const double tp =
        timed([&] { parallel = synth_template_batch(scenes, views, 30, 5, jobs); });
    report("synth_template_batch", ts, tp, set_digest(serial) == set_digest(parallel));
  }
  {
    // self-predictions over a synthesized dataset
    const SampleSet set = synth_template_batch(scenes, views, 30, 5, jobs);
    std::vector<PredictionSet> preds;
    for (const auto& s : set.samples) {
      PredictionSet p;
      p.sample_id = s.sample_id;
      for (const auto& t : s.targets) p.boxes.push_back(to_boxf(t.bbox));
      preds.push_back(std::move(p));
    }
    EvalReport serial, parallel;
    const double ts =
        timed([&] { serial = evaluate(preds, set.samples, EvalSetting::FullDialogue, 0.5, 1); });
    const double tp = timed(
        [&] { parallel = evaluate(preds, set.samples, EvalSetting::FullDialogue, 0.5, jobs); });
    report("evaluate", ts, tp,
           report_to_json(serial).dump() == report_to_json(parallel).dump());
  }
  return 0;
}
