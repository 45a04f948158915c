#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "grec/json_io.hpp"
#include "grec/sample.hpp"

namespace grec {

inline constexpr const char* kToolkitVersion = "0.1.0";

struct DatasetManifest {
  std::string name;
  std::map<std::string, int> tiers;  // "template" / "prompted" / "dialogue" counts
  int n_samples = 0;
  std::uint64_t seed = 0;
  std::string toolkit_version;
  std::map<std::string, std::string> checksums;  // relpath -> fnv1a-64 hex
};

ojson manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const ojson& j);

// 64-bit FNV-1a content fingerprint, hex-encoded. Detects accidental file
// mutation; not cryptographic.
std::string fnv1a_hex(const std::vector<std::uint8_t>& bytes);
std::string fnv1a_file_hex(const std::string& path);

// Writes samples.jsonl, images/*.png and manifest.json under dir; byte-stable
// for identical input. Throws DuplicateSampleId / IoError.
DatasetManifest write_dataset(const SampleSet& set, const std::string& dir,
                              const std::string& name, std::uint64_t seed);

std::vector<TrainingSample> read_samples(const std::string& dir);
DatasetManifest read_manifest(const std::string& dir);

// Re-hashes every file listed in the manifest; returns mismatched paths.
std::vector<std::string> verify_dataset(const std::string& dir);

// Deterministic stratified sample across input datasets; image files are
// copied over. Throws QuotaUnsatisfiable.
DatasetManifest mix_tiers(const std::vector<std::string>& dataset_dirs,
                          const std::map<std::string, int>& quotas, std::uint64_t seed,
                          const std::string& out_dir, const std::string& name);

struct MdcrRecord {
  std::string sample_id;
  std::string image_ref;
  std::string dialogue_text;
  std::string mention_text;
  std::vector<PixelBBox> gt_boxes;
};

// Reads dir/mdcr.jsonl, one record per line:
//   {"sample_id", "image", "dialogue": [{"speaker", "text"}...],
//    "mention", "boxes": [[x,y,w,h]...]}
// Throws SchemaMismatch naming the first offending line.
std::vector<MdcrRecord> ingest_mdcr(const std::string& dir);

// Tier counts, target multiplicities and dialogue shape for a dataset dir.
ojson dataset_stats(const std::string& dir);

}  // namespace grec
