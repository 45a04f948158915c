#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "grec/backend.hpp"
#include "grec/dataset.hpp"
#include "grec/error.hpp"
#include "grec/eval.hpp"
#include "grec/json_io.hpp"
#include "grec/pipeline.hpp"
#include "grec/png_io.hpp"
#include "grec/tier2.hpp"

namespace fs = std::filesystem;
using namespace grec;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 42;
  std::string config_path;
  std::string out_dir = "out";
  int jobs = 1;
};

struct ToolConfig {
  SceneConfig scene;
  ViewConfig views;
};

Rgb parse_rgb(const std::string& text) {
  // "r,g,b"
  int vals[3] = {0, 0, 0};
  std::size_t at = 0;
  for (int i = 0; i < 3; ++i) {
    const auto comma = text.find(',', at);
    const std::string part =
        comma == std::string::npos ? text.substr(at) : text.substr(at, comma - at);
    vals[i] = std::stoi(part);
    at = comma == std::string::npos ? text.size() : comma + 1;
  }
  return {static_cast<std::uint8_t>(vals[0]), static_cast<std::uint8_t>(vals[1]),
          static_cast<std::uint8_t>(vals[2])};
}

// key = value lines; '#' starts a comment. Keys documented in the README.
ToolConfig load_config(const std::string& path) {
  ToolConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto bad = [&](const std::string& why) {
      throw IoError(path + ":" + std::to_string(line_no) + ": " + why);
    };
    if (key == "grid_height") {
      cfg.scene.grid_height = std::stoi(value);
    } else if (key == "min_blocks") {
      cfg.scene.min_blocks = std::stoi(value);
    } else if (key == "require_support") {
      cfg.scene.require_support = value == "true" || value == "1";
    } else if (key == "archetypes") {
      cfg.scene.archetypes.clear();
      std::size_t at = 0;
      while (at < value.size()) {
        const auto comma = value.find(',', at);
        const std::string name =
            comma == std::string::npos ? value.substr(at) : value.substr(at, comma - at);
        const auto a = parse_archetype(name);
        if (!a) bad("unknown archetype " + name);
        cfg.scene.archetypes.push_back(*a);
        at = comma == std::string::npos ? value.size() : comma + 1;
      }
    } else if (key == "palette") {
      // name:r,g,b entries separated by ';'
      std::vector<BlockColor> colors;
      std::size_t at = 0;
      while (at < value.size()) {
        const auto semi = value.find(';', at);
        const std::string entry =
            semi == std::string::npos ? value.substr(at) : value.substr(at, semi - at);
        const auto colon = entry.find(':');
        if (colon == std::string::npos) bad("palette entry needs name:r,g,b");
        colors.push_back({entry.substr(0, colon), parse_rgb(entry.substr(colon + 1))});
        at = semi == std::string::npos ? value.size() : semi + 1;
      }
      if (colors.size() != cfg.scene.palette.size()) bad("palette must list exactly 7 colors");
      std::copy(colors.begin(), colors.end(), cfg.scene.palette.begin());
    } else if (key == "cameras") {
      cfg.views.cameras_per_scene = std::stoi(value);
    } else if (key == "image_width") {
      cfg.views.image_width = std::stoi(value);
    } else if (key == "image_height") {
      cfg.views.image_height = std::stoi(value);
    } else {
      bad("unknown config key " + key);
    }
  }
  return cfg;
}

std::vector<Scene> load_scenes(const std::string& path, const Palette& palette) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open scenes file " + path);
  std::vector<Scene> scenes;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    scenes.push_back(scene_from_json(ojson::parse(line), palette));
  }
  return scenes;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << text;
}

std::vector<PredictionSet> load_predictions(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open predictions file " + path);
  std::vector<PredictionSet> preds;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    preds.push_back(prediction_from_json(ojson::parse(line)));
  }
  return preds;
}

void print_rejections(const RejectionStats& stats) {
  std::cout << "calls: " << stats.total << "  accepted: " << stats.accepted << "\n";
  for (const auto& [reason, count] : stats.counts)
    std::cout << "  " << reject_reason_name(reason) << ": " << count << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grecsynth: synthetic dialogue-grounding data toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalOptions g;
  app.add_option("--seed", g.seed, "master RNG seed");
  app.add_option("--config", g.config_path, "key = value config file");
  app.add_option("--out", g.out_dir, "output directory");
  app.add_option("--jobs", g.jobs, "parallel worker count (1 = serial)");

  // gen-scenes
  auto* gen = app.add_subcommand("gen-scenes", "generate seeded scenes as JSONL");
  int gen_count = 10;
  gen->add_option("--count", gen_count, "number of scenes");

  // render
  auto* rnd = app.add_subcommand("render", "render scenes to PNG with annotations");
  std::string rnd_scenes;
  bool rnd_no_ids = false;
  rnd->add_option("--scenes", rnd_scenes, "scenes JSONL")->required();
  rnd->add_flag("--no-ids", rnd_no_ids, "skip ID glyph stamping");

  // annotate
  auto* ann = app.add_subcommand("annotate", "write bounding-box annotations only");
  std::string ann_scenes;
  ann->add_option("--scenes", ann_scenes, "scenes JSONL")->required();

  // recover-ids
  auto* rec = app.add_subcommand("recover-ids", "render-and-compare letter recovery report");
  std::string rec_scenes;
  int rec_noise = 0;
  rec->add_option("--scenes", rec_scenes, "scenes JSONL")->required();
  rec->add_option("--noise", rec_noise, "uniform noise amplitude, 0..255");

  // synth
  auto* synth = app.add_subcommand("synth", "synthesize a training dataset");
  synth->require_subcommand(1);
  auto* synth_t = synth->add_subcommand("template", "template tier");
  std::string st_scenes;
  int st_budget = 30;
  synth_t->add_option("--scenes", st_scenes, "scenes JSONL")->required();
  synth_t->add_option("--budget", st_budget, "expression budget per view");
  auto* synth_p = synth->add_subcommand("prompted", "prompted tier");
  std::string sp_scenes, sp_backend = "rule";
  int sp_calls = 10;
  synth_p->add_option("--scenes", sp_scenes, "scenes JSONL")->required();
  synth_p->add_option("--calls", sp_calls, "backend calls per view");
  synth_p->add_option("--backend", sp_backend, "rule | http")
      ->check(CLI::IsMember({"rule", "http"}));
  auto* synth_d = synth->add_subcommand("dialogue", "dialogue tier");
  std::string sd_scenes;
  int sd_per_view = 5;
  synth_d->add_option("--scenes", sd_scenes, "scenes JSONL")->required();
  synth_d->add_option("--per-view", sd_per_view, "dialogues per view");

  // mix
  auto* mix = app.add_subcommand("mix", "stratified mix of datasets");
  std::vector<std::string> mix_inputs;
  std::vector<std::string> mix_quotas;
  std::string mix_name = "mix";
  mix->add_option("--input", mix_inputs, "input dataset directory (repeatable)")->required();
  mix->add_option("--quota", mix_quotas, "tier=count (repeatable)")->required();
  mix->add_option("--name", mix_name, "output dataset name");

  // eval
  auto* ev = app.add_subcommand("eval", "score a prediction file against a dataset");
  std::string ev_dataset, ev_pred, ev_setting = "full-dialogue";
  ev->add_option("--dataset", ev_dataset, "dataset directory")->required();
  ev->add_option("--pred", ev_pred, "predictions JSONL")->required();
  ev->add_option("--setting", ev_setting, "full-dialogue | mention-only")
      ->check(CLI::IsMember({"full-dialogue", "mention-only"}));

  // stats
  auto* st = app.add_subcommand("stats", "dataset statistics");
  std::string stats_dataset;
  st->add_option("--dataset", stats_dataset, "dataset directory")->required();

  // ingest-mdcr
  auto* ing = app.add_subcommand("ingest-mdcr", "validate an external benchmark directory");
  std::string ing_dir;
  ing->add_option("--dir", ing_dir, "benchmark directory containing mdcr.jsonl")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const ToolConfig cfg = load_config(g.config_path);
    std::error_code ec;

    if (gen->parsed()) {
      fs::create_directories(g.out_dir, ec);
      const auto scenes = gen_scenes(g.seed, cfg.scene, gen_count, g.jobs);
      std::ostringstream lines;
      for (const Scene& s : scenes) lines << scene_to_json(s).dump() << "\n";
      write_text((fs::path(g.out_dir) / "scenes.jsonl").string(), lines.str());
      std::cout << "wrote " << scenes.size() << " scenes to " << g.out_dir << "/scenes.jsonl\n";
    } else if (rnd->parsed() || ann->parsed()) {
      const bool images = rnd->parsed();
      fs::create_directories(g.out_dir, ec);
      const auto scenes = load_scenes(images ? rnd_scenes : ann_scenes, cfg.scene.palette);
      const auto views = render_batch(scenes, cfg.views, !rnd_no_ids, g.jobs);
      for (const RenderedView& v : views) {
        const std::string stem = v.scene_id + "-c" + std::to_string(v.cam_index);
        if (images) write_png(v.image, (fs::path(g.out_dir) / (stem + ".png")).string());
        write_text((fs::path(g.out_dir) / (stem + ".annotations.json")).string(),
                   annotations_to_json(v.scene_id, v.image.camera, v.annotations).dump(2) + "\n");
      }
      std::cout << "processed " << views.size() << " views\n";
    } else if (rec->parsed()) {
      fs::create_directories(g.out_dir, ec);
      const auto scenes = load_scenes(rec_scenes, cfg.scene.palette);
      const auto reports = recover_batch(scenes, cfg.views, rec_noise, g.seed, g.jobs);
      std::ostringstream lines;
      int recovered = 0, skipped = 0;
      for (std::size_t i = 0; i < reports.size(); ++i) {
        for (const RecoveryResult& r : reports[i].results) {
          ojson j = recovery_result_to_json(r);
          j["scene_id"] = scenes[i].scene_id;
          lines << j.dump() << "\n";
          ++recovered;
        }
        skipped += static_cast<int>(reports[i].skipped.size());
      }
      write_text((fs::path(g.out_dir) / "recovery.jsonl").string(), lines.str());
      std::cout << "recovered " << recovered << " letters, skipped " << skipped << "\n";
    } else if (synth_t->parsed()) {
      const auto scenes = load_scenes(st_scenes, cfg.scene.palette);
      const SampleSet set = synth_template_batch(scenes, cfg.views, st_budget, g.seed, g.jobs);
      const auto manifest = write_dataset(set, g.out_dir, "template", g.seed);
      std::cout << "wrote " << manifest.n_samples << " template samples to " << g.out_dir
                << "\n";
    } else if (synth_p->parsed()) {
      const auto scenes = load_scenes(sp_scenes, cfg.scene.palette);
      PromptedBatchResult result;
      if (sp_backend == "rule") {
        result = synth_prompted_rule_batch(scenes, cfg.views, sp_calls, g.seed, g.jobs);
      } else {
        auto backend = RemoteHttpBackend::from_env();
        result = synth_prompted_remote_batch(scenes, cfg.views, sp_calls, g.seed, *backend);
      }
      const auto manifest = write_dataset(result.set, g.out_dir, "prompted", g.seed);
      print_rejections(result.stats);
      std::cout << "wrote " << manifest.n_samples << " prompted samples to " << g.out_dir
                << "\n";
    } else if (synth_d->parsed()) {
      const auto scenes = load_scenes(sd_scenes, cfg.scene.palette);
      const SampleSet set = synth_dialogue_batch(scenes, cfg.views, sd_per_view, g.seed, g.jobs);
      const auto manifest = write_dataset(set, g.out_dir, "dialogue", g.seed);
      std::cout << "wrote " << manifest.n_samples << " dialogue samples to " << g.out_dir
                << "\n";
    } else if (mix->parsed()) {
      std::map<std::string, int> quotas;
      for (const std::string& q : mix_quotas) {
        const auto eq = q.find('=');
        if (eq == std::string::npos) throw QuotaUnsatisfiable("quota must be tier=count: " + q);
        quotas[q.substr(0, eq)] = std::stoi(q.substr(eq + 1));
      }
      const auto manifest = mix_tiers(mix_inputs, quotas, g.seed, g.out_dir, mix_name);
      std::cout << "mixed " << manifest.n_samples << " samples into " << g.out_dir << "\n";
    } else if (ev->parsed()) {
      const auto dataset = read_samples(ev_dataset);
      const auto preds = load_predictions(ev_pred);
      const EvalSetting setting =
          ev_setting == "mention-only" ? EvalSetting::MentionOnly : EvalSetting::FullDialogue;
      const EvalReport report = evaluate(preds, dataset, setting, 0.5, g.jobs);
      fs::create_directories(g.out_dir, ec);
      write_text((fs::path(g.out_dir) / "report.json").string(),
                 report_to_json(report).dump(2) + "\n");
      std::cout << "mean_f1 " << report.mean_f1 << "  precision_at_f1_1 "
                << report.precision_at_f1_1 << "  n " << report.n_samples << "\n";
    } else if (st->parsed()) {
      std::cout << dataset_stats(stats_dataset).dump(2) << "\n";
    } else if (ing->parsed()) {
      const auto records = ingest_mdcr(ing_dir);
      std::cout << "ingested " << records.size() << " records\n";
    }
  } catch (const BackendUnavailable& e) {
    std::cerr << "backend unavailable: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
