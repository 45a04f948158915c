#include "grec/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "grec/error.hpp"
#include "grec/png_io.hpp"
#include "grec/rng.hpp"

namespace fs = std::filesystem;

namespace grec {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw IoError("short write to " + path);
}

}  // namespace

std::string fnv1a_hex(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  for (int shift = 60; shift >= 0; shift -= 4) os << ((h >> shift) & 0xF);
  return os.str();
}

std::string fnv1a_file_hex(const std::string& path) { return fnv1a_hex(read_file(path)); }

ojson manifest_to_json(const DatasetManifest& m) {
  ojson j;
  j["name"] = m.name;
  ojson tiers;
  for (const char* t : {"template", "prompted", "dialogue"}) {
    const auto it = m.tiers.find(t);
    tiers[t] = it == m.tiers.end() ? 0 : it->second;
  }
  j["tiers"] = tiers;
  j["n_samples"] = m.n_samples;
  j["seed"] = m.seed;
  j["toolkit_version"] = m.toolkit_version;
  ojson sums;
  for (const auto& [path, sum] : m.checksums) sums[path] = sum;
  j["checksums"] = sums;
  return j;
}

DatasetManifest manifest_from_json(const ojson& j) {
  DatasetManifest m;
  m.name = j.at("name").get<std::string>();
  for (const auto& [tier, count] : j.at("tiers").items()) m.tiers[tier] = count.get<int>();
  m.n_samples = j.at("n_samples").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.toolkit_version = j.at("toolkit_version").get<std::string>();
  for (const auto& [path, sum] : j.at("checksums").items())
    m.checksums[path] = sum.get<std::string>();
  return m;
}

DatasetManifest write_dataset(const SampleSet& set, const std::string& dir,
                              const std::string& name, std::uint64_t seed) {
  std::vector<std::string> ids;
  for (const auto& s : set.samples) ids.push_back(s.sample_id);
  std::sort(ids.begin(), ids.end());
  const auto dup = std::adjacent_find(ids.begin(), ids.end());
  if (dup != ids.end()) throw DuplicateSampleId("duplicate sample id: " + *dup);

  std::error_code ec;
  fs::create_directories(fs::path(dir) / "images", ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());

  DatasetManifest m;
  m.name = name;
  m.seed = seed;
  m.toolkit_version = kToolkitVersion;
  m.tiers = {{"template", 0}, {"prompted", 0}, {"dialogue", 0}};

  std::vector<const TrainingSample*> ordered;
  for (const auto& s : set.samples) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const TrainingSample* a, const TrainingSample* b) {
              return a->sample_id < b->sample_id;
            });

  std::ostringstream lines;
  for (const TrainingSample* s : ordered) {
    if (!s->image_ref.empty() && set.images.find(s->image_ref) == set.images.end() &&
        !fs::exists(fs::path(dir) / s->image_ref))
      throw IoError("sample " + s->sample_id + " references missing image " + s->image_ref);
    lines << sample_to_json(*s).dump() << "\n";
    m.tiers[tier_name(s->tier)]++;
  }
  write_file((fs::path(dir) / "samples.jsonl").string(), lines.str());
  m.n_samples = static_cast<int>(ordered.size());

  for (const auto& [ref, image] : set.images) {
    const fs::path path = fs::path(dir) / ref;
    fs::create_directories(path.parent_path(), ec);
    write_png(image, path.string());
  }

  m.checksums["samples.jsonl"] = fnv1a_file_hex((fs::path(dir) / "samples.jsonl").string());
  for (const auto& [ref, image] : set.images)
    m.checksums[ref] = fnv1a_file_hex((fs::path(dir) / ref).string());
  write_file((fs::path(dir) / "manifest.json").string(), manifest_to_json(m).dump(2) + "\n");
  return m;
}

std::vector<TrainingSample> read_samples(const std::string& dir) {
  std::ifstream f(fs::path(dir) / "samples.jsonl");
  if (!f) throw IoError("cannot open samples.jsonl under " + dir);
  std::vector<TrainingSample> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    out.push_back(sample_from_json(ojson::parse(line)));
  }
  return out;
}

DatasetManifest read_manifest(const std::string& dir) {
  std::ifstream f(fs::path(dir) / "manifest.json");
  if (!f) throw IoError("cannot open manifest.json under " + dir);
  ojson j;
  f >> j;
  return manifest_from_json(j);
}

std::vector<std::string> verify_dataset(const std::string& dir) {
  const DatasetManifest m = read_manifest(dir);
  std::vector<std::string> bad;
  for (const auto& [path, sum] : m.checksums) {
    const fs::path full = fs::path(dir) / path;
    if (!fs::exists(full) || fnv1a_file_hex(full.string()) != sum) bad.push_back(path);
  }
  return bad;
}

DatasetManifest mix_tiers(const std::vector<std::string>& dataset_dirs,
                          const std::map<std::string, int>& quotas, std::uint64_t seed,
                          const std::string& out_dir, const std::string& name) {
  struct PoolEntry {
    TrainingSample sample;
    std::string source_dir;
  };
  std::map<std::string, std::vector<PoolEntry>> pools;
  for (const std::string& dir : dataset_dirs) {
    for (TrainingSample& s : read_samples(dir))
      pools[tier_name(s.tier)].push_back({std::move(s), dir});
  }
  for (auto& [tier, pool] : pools) {
    std::sort(pool.begin(), pool.end(), [](const PoolEntry& a, const PoolEntry& b) {
      return a.sample.sample_id < b.sample.sample_id;
    });
  }

  Rng rng(seed);
  std::vector<PoolEntry> chosen;
  for (const auto& [tier, want] : quotas) {
    auto& pool = pools[tier];
    if (static_cast<int>(pool.size()) < want)
      throw QuotaUnsatisfiable("tier " + tier + " has " + std::to_string(pool.size()) +
                               " samples, quota " + std::to_string(want));
    rng.shuffle(pool);
    for (int i = 0; i < want; ++i) chosen.push_back(pool[static_cast<std::size_t>(i)]);
  }
  std::sort(chosen.begin(), chosen.end(), [](const PoolEntry& a, const PoolEntry& b) {
    return a.sample.sample_id < b.sample.sample_id;
  });

  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "images", ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

  DatasetManifest m;
  m.name = name;
  m.seed = seed;
  m.toolkit_version = kToolkitVersion;
  m.tiers = {{"template", 0}, {"prompted", 0}, {"dialogue", 0}};

  std::ostringstream lines;
  std::map<std::string, std::string> image_sources;  // ref -> source dir
  std::vector<std::string> ids;
  for (const PoolEntry& e : chosen) {
    ids.push_back(e.sample.sample_id);
    lines << sample_to_json(e.sample).dump() << "\n";
    m.tiers[tier_name(e.sample.tier)]++;
    if (e.sample.image_ref.empty()) continue;
    const auto it = image_sources.find(e.sample.image_ref);
    if (it == image_sources.end()) {
      image_sources[e.sample.image_ref] = e.source_dir;
    } else if (it->second != e.source_dir) {
      const auto a = fnv1a_file_hex((fs::path(it->second) / e.sample.image_ref).string());
      const auto b = fnv1a_file_hex((fs::path(e.source_dir) / e.sample.image_ref).string());
      if (a != b)
        throw IoError("image ref collision with different content: " + e.sample.image_ref);
    }
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw DuplicateSampleId("sample id collision across mixed datasets");

  write_file((fs::path(out_dir) / "samples.jsonl").string(), lines.str());
  m.n_samples = static_cast<int>(chosen.size());

  for (const auto& [ref, source] : image_sources) {
    const fs::path dst = fs::path(out_dir) / ref;
    fs::create_directories(dst.parent_path(), ec);
    fs::copy_file(fs::path(source) / ref, dst, fs::copy_options::overwrite_existing, ec);
    if (ec) throw IoError("cannot copy image " + ref + ": " + ec.message());
  }

  m.checksums["samples.jsonl"] = fnv1a_file_hex((fs::path(out_dir) / "samples.jsonl").string());
  for (const auto& [ref, source] : image_sources)
    m.checksums[ref] = fnv1a_file_hex((fs::path(out_dir) / ref).string());
  write_file((fs::path(out_dir) / "manifest.json").string(), manifest_to_json(m).dump(2) + "\n");
  return m;
}

std::vector<MdcrRecord> ingest_mdcr(const std::string& dir) {
  const fs::path path = fs::path(dir) / "mdcr.jsonl";
  std::ifstream f(path);
  if (!f) throw SchemaMismatch("expected " + path.string());
  std::vector<MdcrRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const ojson j = ojson::parse(line, nullptr, false);
    const auto fail = [&](const std::string& why) {
      throw SchemaMismatch("mdcr.jsonl line " + std::to_string(line_no) + ": " + why);
    };
    if (j.is_discarded()) fail("not valid JSON");
    for (const char* field : {"sample_id", "image", "dialogue", "mention", "boxes"})
      if (!j.contains(field)) fail(std::string("missing field ") + field);
    MdcrRecord r;
    r.sample_id = j.at("sample_id").get<std::string>();
    r.image_ref = j.at("image").get<std::string>();
    if (!j.at("dialogue").is_array()) fail("dialogue must be an array of turns");
    std::ostringstream text;
    for (const auto& turn : j.at("dialogue")) {
      if (!turn.contains("speaker") || !turn.contains("text")) fail("turn missing speaker/text");
      text << turn.at("speaker").get<std::string>() << ": "
           << turn.at("text").get<std::string>() << "\n";
    }
    r.dialogue_text = text.str();
    r.mention_text = j.at("mention").get<std::string>();
    if (!j.at("boxes").is_array()) fail("boxes must be an array");
    for (const auto& b : j.at("boxes")) {
      if (!b.is_array() || b.size() != 4) fail("box must be [x, y, w, h]");
      r.gt_boxes.push_back(
          {b[0].get<int>(), b[1].get<int>(), b[2].get<int>(), b[3].get<int>()});
    }
    out.push_back(std::move(r));
  }
  return out;
}

ojson dataset_stats(const std::string& dir) {
  const auto samples = read_samples(dir);
  ojson j;
  j["n_samples"] = samples.size();
  std::map<std::string, int> tiers = {{"template", 0}, {"prompted", 0}, {"dialogue", 0}};
  std::map<int, int> target_counts;
  double turns_sum = 0;
  int no_target = 0;
  for (const auto& s : samples) {
    tiers[tier_name(s.tier)]++;
    target_counts[static_cast<int>(s.targets.size())]++;
    turns_sum += static_cast<double>(s.dialogue.turns.size());
    if (s.targets.empty()) ++no_target;
  }
  ojson tj;
  for (const auto& [tier, count] : tiers) tj[tier] = count;
  j["tiers"] = tj;
  ojson tc;
  for (const auto& [n, count] : target_counts) tc[std::to_string(n)] = count;
  j["targets_per_sample"] = tc;
  j["no_target_samples"] = no_target;
  j["mean_turns"] = samples.empty() ? 0.0 : turns_sum / static_cast<double>(samples.size());
  return j;
}

}  // namespace grec
