#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "knotph/analysis.hpp"
#include "knotph/geometry.hpp"
#include "knotph/landscape.hpp"
#include "knotph/persistence.hpp"

namespace knotph {

struct PipelineConfig {
  std::filesystem::path input_dir;
  std::filesystem::path annotation_path;
  /// Optional square similarity CSV; when set, homology classes come from
  /// single linkage on it instead of the annotation column.
  std::filesystem::path similarity_path;
  std::filesystem::path output_dir;
  int interp_factor = 5;
  MaxScale max_scale = MaxScale::automatic();
  std::vector<double> sigmas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::uint64_t seed = 0;
  std::size_t n_neighbors = 5;
  int landscape_p = 1;
  std::size_t randomization_k = 1000;
  /// 0 picks the hardware concurrency.
  std::size_t workers = 0;
  std::string metric = "landscape";
  double homology_threshold = 0.7;
  std::size_t homology_top_k = 9;

  /// Sets one key from its text form. Relative paths resolve against `base`.
  /// Throws ConfigError on unknown keys or invalid values.
  void set(std::string_view key, std::string_view value, const std::filesystem::path& base = {});
  /// Every key with its text form, in a fixed order (output_dir excluded).
  std::vector<std::pair<std::string, std::string>> entries() const;
  std::size_t worker_count() const;
};

/// `key = value` lines; `#` starts a comment.
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base = {});
PipelineConfig load_config(const std::filesystem::path& file);

struct StructureRecord {
  std::string id;
  std::size_t length = 0;
  std::optional<KnotAnnotation> annotation;
  std::optional<double> depth;
  std::string homology_class;
  /// Paths relative to the output directory; empty until produced.
  std::string cloud;
  std::string diagram;
  std::string landscape;

  std::string depth_label() const;
};

struct Failure {
  std::string id;
  std::string stage;
  std::string message;
};

struct RunManifest {
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<StructureRecord> structures;
  std::map<std::string, std::string> artifacts;
  std::vector<Failure> failures;
};

std::string write_manifest(const RunManifest& m);
RunManifest read_manifest(std::string_view content);
RunManifest load_manifest(const PipelineConfig& config);
void save_manifest(const RunManifest& m, const PipelineConfig& config);

/// Problems that do not stop a stage.
struct StageReport {
  std::vector<Failure> failures;
  std::vector<std::string> warnings;
};

/// Reads every `.xyz` in input_dir (sorted by file name), attaches
/// annotations, writes interpolated clouds and a fresh manifest.
RunManifest cmd_ingest(const PipelineConfig& config, StageReport& report);

/// Persistence diagram and landscape per structure, on `workers` threads.
/// Failing structures are reported and left without outputs.
void cmd_ph(RunManifest& manifest, const PipelineConfig& config, StageReport& report);

struct CompareResult {
  DistanceMatrix distances;
  std::optional<Embedding> embedding;
  std::optional<double> silhouette_homology;
  std::optional<double> silhouette_depth;
};

/// Pairwise distances (`metric` is "landscape" or "wasserstein"), 2-D Isomap,
/// silhouettes by homology and depth class, CSV/TSV/SVG outputs.
CompareResult cmd_compare(RunManifest& manifest, const PipelineConfig& config, const std::string& metric,
                          StageReport& report);

struct TestRequest {
  std::string class_a;
  std::string class_b;
  /// "homology" or "depth".
  std::string by = "homology";
  std::set<int> layers;
};

RandomizationResult cmd_test(RunManifest& manifest, const PipelineConfig& config, const TestRequest& request,
                             StageReport& report);

struct GeneratorResult {
  std::size_t k = 0;
  LayerPeak peak;
  PersistencePair pair;
  CycleRepresentative cycle;
  std::optional<double> core_overlap;
};

GeneratorResult cmd_generator(RunManifest& manifest, const PipelineConfig& config, const std::string& id,
                              std::size_t k, std::optional<double> t_star, StageReport& report);

struct NoiseRow {
  double sigma = 0.0;
  std::optional<double> silhouette_homology;
  std::optional<double> silhouette_depth;
};

/// For each sigma, perturbs the C-alpha atoms of every structure, then
/// re-interpolates and reruns ph and compare under noise/sigma_<sigma>/.
std::vector<NoiseRow> cmd_noise(RunManifest& manifest, const PipelineConfig& config, StageReport& report);

}  // namespace knotph
