#include "knotph/pipeline.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <thread>

#include "json.hpp"
#include "knotph/diagram_metrics.hpp"
#include "knotph/error.hpp"
#include "knotph/random.hpp"
#include "knotph/svg.hpp"
#include "knotph/text.hpp"

namespace knotph {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const std::string& why) {
  throw ConfigError("config key '" + std::string(key) + "' = '" + std::string(value) + "': " + why);
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view value) {
  const auto v = text::to_int(value);
  if (!v || *v < 0) bad_value(key, value, "expected a nonnegative integer");
  return static_cast<std::uint64_t>(*v);
}

double parse_real(std::string_view key, std::string_view value) {
  const auto v = text::to_double(value);
  if (!v || !std::isfinite(*v)) bad_value(key, value, "expected a number");
  return *v;
}

std::string short_number(double v) { return text::format_double(v, 6); }

std::string optional_number(const std::optional<double>& v) { return v ? text::format_double(*v) : "NA"; }

// File-name-safe rendering of a class or structure name.
std::string safe_name(const std::string& s) {
  std::string out;
  for (const char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
  return out.empty() ? "_" : out;
}

fs::path out_path(const PipelineConfig& config, const std::string& relative) { return config.output_dir / relative; }

PointCloud load_cloud(const PipelineConfig& config, const StructureRecord& r) {
  if (r.cloud.empty()) throw Error("structure '" + r.id + "' has no point cloud; run ingest first");
  PointCloud cloud;
  cloud.source_id = r.id;
  cloud.points = parse_xyz(text::read_file(out_path(config, r.cloud)), r.id).points;
  cloud.interp_factor = config.interp_factor;
  return cloud;
}

const StructureRecord& find_record(const RunManifest& m, const std::string& id) {
  for (const auto& r : m.structures)
    if (r.id == id) return r;
  throw Error("no structure '" + id + "' in the manifest");
}

std::string label_of(const StructureRecord& r, const std::string& by) {
  if (by == "homology") return r.homology_class;
  if (by == "depth") return r.depth_label();
  throw ConfigError("class labelling must be 'homology' or 'depth', got '" + by + "'");
}

std::optional<double> labelled_silhouette(const DistanceMatrix& dm, const std::optional<Embedding>& embedding,
                                          const std::vector<std::string>& labels, const std::string& name,
                                          StageReport& report) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (!labels[i].empty()) rows.push_back(i);
  ClusterLabels cl;
  for (const auto i : rows) {
    cl.ids.push_back(dm.ids()[i]);
    cl.labels.push_back(labels[i]);
  }
  try {
    if (rows.size() < 2) throw UndefinedSilhouetteError("fewer than two labelled structures");
    if (embedding) {
      Embedding sub;
      sub.dim = embedding->dim;
      sub.ids = cl.ids;
      for (const auto i : rows)
        for (std::size_t c = 0; c < sub.dim; ++c) sub.coords.push_back(embedding->at(i, c));
      return silhouette(sub, cl);
    }
    return silhouette(dm.subset(rows), cl);
  } catch (const UndefinedSilhouetteError& e) {
    report.warnings.push_back("silhouette by " + name + " undefined: " + e.what());
    return std::nullopt;
  }
}

void write_scatter(const fs::path& file, const std::string& title, const Embedding& e,
                   const std::vector<std::string>& labels) {
  std::map<std::string, svg::Series> by_label;
  for (std::size_t i = 0; i < e.ids.size(); ++i) {
    const std::string name = labels[i].empty() ? "unlabelled" : labels[i];
    auto& s = by_label[name];
    s.label = name;
    s.points.push_back({e.at(i, 0), e.dim > 1 ? e.at(i, 1) : 0.0});
  }
  std::vector<svg::Series> series;
  for (auto& [name, s] : by_label) series.push_back(std::move(s));
  text::write_file(file, svg::scatter_plot(title, series));
}

// Orthographic projection onto the two leading principal axes.
std::vector<std::pair<double, double>> project(const std::vector<Point3>& pts) {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : pts) mean += Eigen::Vector3d(p.x, p.y, p.z);
  mean /= static_cast<double>(pts.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector3d d = Eigen::Vector3d(p.x, p.y, p.z) - mean;
    cov += d * d.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  Eigen::Vector3d a = solver.eigenvectors().col(2), b = solver.eigenvectors().col(1);
  const auto fix_sign = [](Eigen::Vector3d& v) {
    Eigen::Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    if (v(big) < 0) v = -v;
  };
  fix_sign(a);
  fix_sign(b);
  std::vector<std::pair<double, double>> out;
  for (const auto& p : pts) {
    const Eigen::Vector3d d = Eigen::Vector3d(p.x, p.y, p.z) - mean;
    out.push_back({d.dot(a), d.dot(b)});
  }
  return out;
}

std::string backbone_svg(const std::string& title, const PointCloud& cloud, const CycleRepresentative& cycle,
                         const std::optional<KnotAnnotation>& annotation) {
  const auto xy = project(cloud.points);
  double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
  for (const auto& [x, y] : xy) lo_x = std::min(lo_x, x), hi_x = std::max(hi_x, x), lo_y = std::min(lo_y, y), hi_y = std::max(hi_y, y);
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-9});
  const double size = 520, margin = 40;
  const auto sx = [&](double x) { return margin + (x - lo_x) / span * size; };
  const auto sy = [&](double y) { return margin + size - (y - lo_y) / span * size; };

  svg::Document doc(size + 2 * margin + 160, size + 2 * margin);
  doc.text(margin, 24, title, 14);
  std::vector<std::pair<double, double>> line;
  for (const auto& [x, y] : xy) line.push_back({sx(x), sy(y)});
  doc.polyline(line, "#bbbbbb", 1.5);
  if (annotation) {
    const std::size_t step = static_cast<std::size_t>(cloud.interp_factor) + 1;
    const std::size_t first = annotation->core_start * step;
    const std::size_t last = std::min(annotation->core_end * step, xy.size() - 1);
    if (first <= last)
      doc.polyline({line.begin() + static_cast<std::ptrdiff_t>(first), line.begin() + static_cast<std::ptrdiff_t>(last) + 1},
                   "#2ca02c", 4);
  }
  for (const auto& e : cycle.edges) {
    if (e.on_backbone)
      doc.line(line[e.u].first, line[e.u].second, line[e.v].first, line[e.v].second, "#1f77b4", 2.5);
    else
      doc.line(line[e.u].first, line[e.u].second, line[e.v].first, line[e.v].second, "#d62728", 2, true);
  }
  const double lx = size + 2 * margin;
  doc.line(lx, 60, lx + 20, 60, "#bbbbbb", 1.5);
  doc.text(lx + 26, 64, "backbone", 11);
  doc.line(lx, 80, lx + 20, 80, "#2ca02c", 4);
  doc.text(lx + 26, 84, "knot core", 11);
  doc.line(lx, 100, lx + 20, 100, "#1f77b4", 2.5);
  doc.text(lx + 26, 104, "cycle, backbone edge", 11);
  doc.line(lx, 120, lx + 20, 120, "#d62728", 2, true);
  doc.text(lx + 26, 124, "cycle, other edge", 11);
  return doc.str();
}

json record_to_json(const StructureRecord& r) {
  json j;
  j["id"] = r.id;
  j["length"] = r.length;
  j["core_start"] = r.annotation ? json(r.annotation->core_start) : json(nullptr);
  j["core_end"] = r.annotation ? json(r.annotation->core_end) : json(nullptr);
  j["depth"] = r.depth ? json(*r.depth) : json(nullptr);
  j["depth_class"] = r.annotation ? json(std::string(to_string(r.annotation->depth_class))) : json(nullptr);
  j["homology_class"] = r.homology_class;
  j["cloud"] = r.cloud;
  j["diagram"] = r.diagram;
  j["landscape"] = r.landscape;
  return j;
}

}  // namespace

// ---------------------------------------------------------------- config

void PipelineConfig::set(std::string_view key, std::string_view value, const fs::path& base) {
  const auto path_value = [&] {
    fs::path p{std::string(value)};
    return p.empty() || p.is_absolute() || base.empty() ? p : base / p;
  };
  if (key == "input_dir") {
    input_dir = path_value();
  } else if (key == "annotation_path") {
    annotation_path = path_value();
  } else if (key == "similarity_path") {
    similarity_path = path_value();
  } else if (key == "output_dir") {
    output_dir = path_value();
  } else if (key == "interp_factor") {
    const auto d = parse_unsigned(key, value);
    if (d > 100) bad_value(key, value, "at most 100");
    interp_factor = static_cast<int>(d);
  } else if (key == "max_scale") {
    if (value == "auto") {
      max_scale = MaxScale::automatic();
    } else {
      const double v = parse_real(key, value);
      if (!(v > 0.0)) bad_value(key, value, "must be positive or 'auto'");
      max_scale = MaxScale::fixed(v);
    }
  } else if (key == "sigmas") {
    std::vector<double> out;
    for (const auto part : text::split(value, ',')) {
      const double v = parse_real(key, text::trim(part));
      if (v < 0.0) bad_value(key, value, "noise levels must be nonnegative");
      out.push_back(v);
    }
    if (out.empty()) bad_value(key, value, "need at least one sigma");
    sigmas = std::move(out);
  } else if (key == "seed") {
    seed = parse_unsigned(key, value);
  } else if (key == "n_neighbors") {
    n_neighbors = parse_unsigned(key, value);
    if (n_neighbors < 1) bad_value(key, value, "must be at least 1");
  } else if (key == "landscape_p") {
    const auto p = parse_unsigned(key, value);
    if (p < 1 || p > 64) bad_value(key, value, "must be an integer in [1, 64]");
    landscape_p = static_cast<int>(p);
  } else if (key == "randomization_k") {
    randomization_k = parse_unsigned(key, value);
    if (randomization_k < 1) bad_value(key, value, "must be at least 1");
  } else if (key == "workers") {
    workers = parse_unsigned(key, value);
  } else if (key == "metric") {
    if (value != "landscape" && value != "wasserstein") bad_value(key, value, "expected landscape or wasserstein");
    metric = std::string(value);
  } else if (key == "homology_threshold") {
    homology_threshold = parse_real(key, value);
    if (!(homology_threshold > 0.0 && homology_threshold < 1.0)) bad_value(key, value, "must lie in (0, 1)");
  } else if (key == "homology_top_k") {
    homology_top_k = parse_unsigned(key, value);
    if (homology_top_k < 1) bad_value(key, value, "must be at least 1");
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::entries() const {
  std::string sigma_list;
  for (std::size_t i = 0; i < sigmas.size(); ++i) sigma_list += (i ? "," : "") + short_number(sigmas[i]);
  return {{"input_dir", input_dir.generic_string()},
          {"annotation_path", annotation_path.generic_string()},
          {"similarity_path", similarity_path.generic_string()},
          {"interp_factor", std::to_string(interp_factor)},
          {"max_scale", max_scale.is_auto() ? "auto" : text::format_double(max_scale.value())},
          {"sigmas", sigma_list},
          {"seed", std::to_string(seed)},
          {"n_neighbors", std::to_string(n_neighbors)},
          {"landscape_p", std::to_string(landscape_p)},
          {"randomization_k", std::to_string(randomization_k)},
          {"metric", metric},
          {"homology_threshold", short_number(homology_threshold)},
          {"homology_top_k", std::to_string(homology_top_k)}};
}

std::size_t PipelineConfig::worker_count() const {
  if (workers) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

PipelineConfig parse_config(std::string_view content, const fs::path& base) {
  PipelineConfig config;
  const auto all = text::lines(content);
  for (std::size_t i = 0; i < all.size(); ++i) {
    std::string_view line = all[i];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(i + 1) + ": expected 'key = value'");
    try {
      config.set(text::trim(line.substr(0, eq)), text::trim(line.substr(eq + 1)), base);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return config;
}

PipelineConfig load_config(const fs::path& file) {
  if (!fs::exists(file)) throw ConfigError("config file '" + file.string() + "' not found");
  return parse_config(text::read_file(file), file.parent_path());
}

// -------------------------------------------------------------- manifest

std::string StructureRecord::depth_label() const {
  return annotation ? std::string(to_string(annotation->depth_class)) : std::string();
}

std::string write_manifest(const RunManifest& m) {
  json j;
  j["format"] = "knotph-manifest v1";
  json config = json::object();
  for (const auto& [k, v] : m.config) config[k] = v;
  j["config"] = config;
  j["structures"] = json::array();
  for (const auto& r : m.structures) j["structures"].push_back(record_to_json(r));
  j["artifacts"] = m.artifacts;
  j["failures"] = json::array();
  for (const auto& f : m.failures) j["failures"].push_back({{"id", f.id}, {"stage", f.stage}, {"message", f.message}});
  return j.dump(2) + "\n";
}

RunManifest read_manifest(std::string_view content) {
  RunManifest m;
  try {
    const json j = json::parse(content);
    if (j.at("format") != "knotph-manifest v1") throw Error("unsupported manifest format");
    for (const auto& [k, v] : j.at("config").items()) m.config.push_back({k, v.get<std::string>()});
    for (const auto& s : j.at("structures")) {
      StructureRecord r;
      r.id = s.at("id").get<std::string>();
      r.length = s.at("length").get<std::size_t>();
      if (!s.at("core_start").is_null())
        r.annotation = KnotAnnotation::from_core(r.length, s.at("core_start").get<std::size_t>(),
                                                 s.at("core_end").get<std::size_t>());
      if (!s.at("depth").is_null()) r.depth = s.at("depth").get<double>();
      r.homology_class = s.at("homology_class").get<std::string>();
      r.cloud = s.at("cloud").get<std::string>();
      r.diagram = s.at("diagram").get<std::string>();
      r.landscape = s.at("landscape").get<std::string>();
      m.structures.push_back(std::move(r));
    }
    m.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
    for (const auto& f : j.at("failures"))
      m.failures.push_back({f.at("id").get<std::string>(), f.at("stage").get<std::string>(),
                            f.at("message").get<std::string>()});
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

RunManifest load_manifest(const PipelineConfig& config) {
  const auto file = config.output_dir / "manifest.json";
  if (!fs::exists(file)) throw Error("no manifest at '" + file.string() + "'; run ingest first");
  return read_manifest(text::read_file(file));
}

void save_manifest(const RunManifest& m, const PipelineConfig& config) {
  text::write_file(config.output_dir / "manifest.json", write_manifest(m));
}

// ---------------------------------------------------------------- stages

RunManifest cmd_ingest(const PipelineConfig& config, StageReport& report) {
  if (config.input_dir.empty()) throw ConfigError("input_dir is not set");
  if (config.output_dir.empty()) throw ConfigError("output_dir is not set");
  if (!fs::is_directory(config.input_dir))
    throw ConfigError("input_dir '" + config.input_dir.string() + "' is not a directory");

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(config.input_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".xyz") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw EmptyInputError("no .xyz files in '" + config.input_dir.string() + "'");

  std::map<std::string, AnnotationRecord> annotations;
  if (!config.annotation_path.empty()) {
    if (fs::exists(config.annotation_path)) {
      try {
        annotations = parse_annotation_tsv(text::read_file(config.annotation_path));
      } catch (const ParseError& e) {
        throw ParseError(config.annotation_path.string() + ": " + e.what(), e.line());
      }
    } else {
      report.warnings.push_back("annotation file '" + config.annotation_path.string() +
                                "' not found; depth fields left empty");
    }
  }

  RunManifest m;
  m.config = config.entries();
  for (const auto& file : files) {
    const std::string id = file.stem().string();
    BackboneChain chain;
    try {
      chain = parse_xyz(text::read_file(file), id);
    } catch (const ParseError& e) {
      throw ParseError(file.string() + ": " + e.what(), e.line());
    }
    StructureRecord r;
    r.id = id;
    r.length = chain.length();
    if (const auto it = annotations.find(id); it != annotations.end()) {
      if (it->second.length != chain.length())
        throw Error("annotation for '" + id + "' gives length " + std::to_string(it->second.length) + " but the file has " +
                    std::to_string(chain.length()) + " residues");
      r.annotation = KnotAnnotation::from_core(chain.length(), it->second.core_start, it->second.core_end);
      r.depth = knot_depth(chain.length(), r.annotation->n_tail_len, r.annotation->c_tail_len);
      r.homology_class = it->second.homology_class;
    }
    r.cloud = "clouds/" + id + ".xyz";
    text::write_file(out_path(config, r.cloud), write_xyz(interpolate(chain, config.interp_factor).points));
    m.structures.push_back(std::move(r));
  }

  if (!config.similarity_path.empty()) {
    const auto sim = read_distance_csv(text::read_file(config.similarity_path));
    const auto classes = top_k_classes(single_linkage_clusters(sim, config.homology_threshold), config.homology_top_k);
    std::map<std::string, std::string> by_id;
    for (std::size_t i = 0; i < classes.ids.size(); ++i) by_id[classes.ids[i]] = classes.labels[i];
    for (auto& r : m.structures) {
      const auto it = by_id.find(r.id);
      if (it != by_id.end()) r.homology_class = it->second;
      else report.warnings.push_back("'" + r.id + "' is missing from the similarity matrix");
    }
  }
  save_manifest(m, config);
  return m;
}

void cmd_ph(RunManifest& manifest, const PipelineConfig& config, StageReport& report) {
  const std::size_t n = manifest.structures.size();
  std::vector<std::optional<std::string>> errors(n);
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      auto& r = manifest.structures[i];
      try {
        const PointCloud cloud = load_cloud(config, r);
        const PersistenceDiagram diagram = compute_ph1(cloud, config.max_scale);
        const std::string dgm = "diagrams/" + r.id + ".dgm.csv", lan = "landscapes/" + r.id + ".lan";
        text::write_file(out_path(config, dgm), write_diagram_csv(diagram));
        text::write_file(out_path(config, lan), write_lan(diagram_to_landscape(diagram)));
        r.diagram = dgm;
        r.landscape = lan;
      } catch (const std::exception& e) {
        r.diagram.clear();
        r.landscape.clear();
        errors[i] = e.what();
      }
    }
  };
  const std::size_t lanes = std::min(config.worker_count(), std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < lanes; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::erase_if(manifest.failures, [](const Failure& f) { return f.stage == "ph"; });
  for (std::size_t i = 0; i < n; ++i)
    if (errors[i]) {
      const Failure f{manifest.structures[i].id, "ph", *errors[i]};
      manifest.failures.push_back(f);
      report.failures.push_back(f);
    }
  save_manifest(manifest, config);
}

CompareResult cmd_compare(RunManifest& manifest, const PipelineConfig& config, const std::string& metric,
                          StageReport& report) {
  if (metric != "landscape" && metric != "wasserstein")
    throw ConfigError("metric must be landscape or wasserstein, got '" + metric + "'");
  std::vector<const StructureRecord*> used;
  for (const auto& r : manifest.structures)
    if (!r.diagram.empty() && !r.landscape.empty()) used.push_back(&r);
  if (used.size() < 2) throw Error("compare needs at least two structures with diagrams; run ph first");

  std::vector<std::string> ids;
  for (const auto* r : used) ids.push_back(r->id);
  CompareResult result;
  if (metric == "landscape") {
    std::vector<Landscape> ls;
    for (const auto* r : used) ls.push_back(read_lan(text::read_file(out_path(config, r->landscape))));
    result.distances = DistanceMatrix(ids);
    for (std::size_t i = 0; i < ls.size(); ++i)
      for (std::size_t j = i + 1; j < ls.size(); ++j)
        result.distances.set(i, j, landscape_distance(ls[i], ls[j], config.landscape_p));
  } else {
    std::vector<PersistenceDiagram> ds;
    for (const auto* r : used) ds.push_back(read_diagram_csv(text::read_file(out_path(config, r->diagram)), r->id));
    result.distances = pairwise_wasserstein(ds);
  }

  const std::string base = "compare/" + metric;
  text::write_file(out_path(config, base + "_distances.csv"), write_distance_csv(result.distances));
  manifest.artifacts[metric + "_distances"] = base + "_distances.csv";

  std::size_t k = config.n_neighbors;
  if (k >= used.size()) {
    k = used.size() - 1;
    report.warnings.push_back("n_neighbors lowered to " + std::to_string(k) + " for " + std::to_string(used.size()) +
                              " structures");
  }
  try {
    result.embedding = isomap_embed(result.distances, k, 2);
  } catch (const DegenerateGeometryError& e) {
    report.warnings.push_back(std::string("no 2-D embedding: ") + e.what() + "; silhouettes use raw distances");
  }

  std::vector<std::string> homology, depth;
  for (const auto* r : used) {
    homology.push_back(r->homology_class);
    depth.push_back(r->depth_label());
  }
  result.silhouette_homology = labelled_silhouette(result.distances, result.embedding, homology, "homology", report);
  result.silhouette_depth = labelled_silhouette(result.distances, result.embedding, depth, "depth", report);

  const std::string basis = result.embedding ? "embedding" : "distances";
  text::write_file(out_path(config, base + "_silhouette.tsv"),
                   "labeling\tbasis\tsilhouette\nhomology\t" + basis + '\t' +
                       optional_number(result.silhouette_homology) + "\ndepth\t" + basis + '\t' +
                       optional_number(result.silhouette_depth) + '\n');
  manifest.artifacts[metric + "_silhouette"] = base + "_silhouette.tsv";
  if (result.embedding) {
    text::write_file(out_path(config, base + "_embedding.csv"), write_embedding_csv(*result.embedding));
    write_scatter(out_path(config, base + "_homology.svg"), "Isomap (" + metric + ") by homology class",
                  *result.embedding, homology);
    write_scatter(out_path(config, base + "_depth.svg"), "Isomap (" + metric + ") by depth class", *result.embedding,
                  depth);
    manifest.artifacts[metric + "_embedding"] = base + "_embedding.csv";
    manifest.artifacts[metric + "_homology_plot"] = base + "_homology.svg";
    manifest.artifacts[metric + "_depth_plot"] = base + "_depth.svg";
  } else {
    for (const char* suffix : {"_embedding", "_homology_plot", "_depth_plot"}) manifest.artifacts.erase(metric + suffix);
  }
  save_manifest(manifest, config);
  return result;
}

RandomizationResult cmd_test(RunManifest& manifest, const PipelineConfig& config, const TestRequest& request,
                             StageReport& report) {
  (void)report;
  LandscapeSample a{request.class_a, {}}, b{request.class_b, {}};
  std::vector<std::string> ids_a, ids_b;
  for (const auto& r : manifest.structures) {
    if (r.landscape.empty()) continue;
    const std::string label = label_of(r, request.by);
    if (label.empty() || (label != request.class_a && label != request.class_b)) continue;
    const Landscape l = read_lan(text::read_file(out_path(config, r.landscape)));
    if (label == request.class_a) a.landscapes.push_back(l), ids_a.push_back(r.id);
    if (label == request.class_b) b.landscapes.push_back(l), ids_b.push_back(r.id);
  }
  for (const auto* s : {&a, &b})
    if (s->landscapes.empty())
      throw Error("no structures with landscapes in " + request.by + " class '" + s->label + "'");

  const RandomizationResult result =
      randomization_test(a, b, config.randomization_k, config.seed, static_cast<double>(config.landscape_p));

  const std::string dir = "test/" + safe_name(request.class_a) + "_vs_" + safe_name(request.class_b) + "/";
  text::write_file(out_path(config, dir + "average_a.lan"), write_lan(average_landscape(a)));
  text::write_file(out_path(config, dir + "average_b.lan"), write_lan(average_landscape(b)));
  text::write_file(out_path(config, dir + "test.tsv"),
                   "class_a\tclass_b\tt_obs\tp_value\tk\tseed\n" + request.class_a + '\t' + request.class_b + '\t' +
                       text::format_double(result.t_obs) + '\t' + text::format_double(result.p_value) + '\t' +
                       std::to_string(result.draws) + '\t' + std::to_string(result.seed) + '\n');
  manifest.artifacts["test_" + request.class_a + "_vs_" + request.class_b] = dir + "test.tsv";

  if (!request.layers.empty()) {
    std::vector<std::string> ids = ids_a;
    std::vector<Landscape> ls = a.landscapes;
    for (std::size_t i = 0; i < ids_b.size(); ++i)
      if (std::find(ids.begin(), ids.end(), ids_b[i]) == ids.end()) ids.push_back(ids_b[i]), ls.push_back(b.landscapes[i]);
    DistanceMatrix heat(ids);
    for (std::size_t i = 0; i < ls.size(); ++i)
      for (std::size_t j = i + 1; j < ls.size(); ++j) heat.set(i, j, layer_restricted_distance(ls[i], ls[j], request.layers));
    std::string layer_names;
    for (const int k : request.layers) layer_names += (layer_names.empty() ? "" : ",") + std::to_string(k);
    std::vector<double> values;
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = 0; j < ids.size(); ++j) values.push_back(heat(i, j));
    text::write_file(out_path(config, dir + "layers.csv"), write_distance_csv(heat));
    text::write_file(out_path(config, dir + "layers.svg"),
                     svg::heat_map("Landscape distance on layers {" + layer_names + "}", ids, values));
    manifest.artifacts["layers_" + request.class_a + "_vs_" + request.class_b] = dir + "layers.csv";
  }
  save_manifest(manifest, config);
  return result;
}

GeneratorResult cmd_generator(RunManifest& manifest, const PipelineConfig& config, const std::string& id,
                              std::size_t k, std::optional<double> t_star, StageReport& report) {
  (void)report;
  const StructureRecord& r = find_record(manifest, id);
  if (r.diagram.empty() || r.landscape.empty()) throw Error("structure '" + id + "' has no diagram; run ph first");
  const Landscape l = read_lan(text::read_file(out_path(config, r.landscape)));

  GeneratorResult result;
  result.k = k;
  result.peak = find_layer_peak(l, k, t_star);
  const PointCloud cloud = load_cloud(config, r);
  const RipsPersistence ph(cloud, config.max_scale);
  const std::size_t index = pair_at(ph.diagram(), k, result.peak.t);
  result.pair = ph.diagram().pairs[index];
  result.cycle = ph.representative(index);
  if (r.annotation) result.core_overlap = cycle_core_overlap(result.cycle, cloud, *r.annotation);

  const std::string base = "generator/" + safe_name(id) + "_k" + std::to_string(k);
  text::write_file(out_path(config, base + ".csv"), write_generator_csv(result.cycle));
  text::write_file(out_path(config, base + ".svg"),
                   backbone_svg(id + ": lambda_" + std::to_string(k) + " generator", cloud, result.cycle, r.annotation));
  text::write_file(out_path(config, base + ".tsv"),
                   "id\tk\tt_peak\theight\tbirth\tdeath\tcycle_edges\tcore_overlap\n" + id + '\t' + std::to_string(k) +
                       '\t' + text::format_double(result.peak.t) + '\t' + text::format_double(result.peak.height) +
                       '\t' + text::format_double(result.pair.birth) + '\t' + text::format_double(result.pair.death) +
                       '\t' + std::to_string(result.cycle.edges.size()) + '\t' +
                       optional_number(result.core_overlap) + '\n');
  manifest.artifacts["generator_" + id + "_k" + std::to_string(k)] = base + ".tsv";
  save_manifest(manifest, config);
  return result;
}

std::vector<NoiseRow> cmd_noise(RunManifest& manifest, const PipelineConfig& config, StageReport& report) {
  const std::size_t stride = static_cast<std::size_t>(config.interp_factor) + 1;
  std::vector<NoiseRow> rows;
  std::string table = "sigma\tsilhouette_homology\tsilhouette_depth\n";
  for (std::size_t s = 0; s < config.sigmas.size(); ++s) {
    const double sigma = config.sigmas[s];
    PipelineConfig sub = config;
    const std::string dir = "noise/sigma_" + short_number(sigma);
    sub.output_dir = config.output_dir / dir;
    NoiseRow row{sigma, std::nullopt, std::nullopt};
    try {
      RunManifest m;
      m.config = sub.entries();
      m.config.push_back({"noise_sigma", short_number(sigma)});
      for (std::size_t i = 0; i < manifest.structures.size(); ++i) {
        StructureRecord r = manifest.structures[i];
        r.diagram.clear();
        r.landscape.clear();
        const PointCloud cloud = load_cloud(config, r);
        BackboneChain chain;
        chain.id = r.id;
        PointCloud atoms;
        for (std::size_t p = 0; p < cloud.size(); p += stride) atoms.points.push_back(cloud.points[p]);
        chain.points = perturb(atoms, sigma, derive_seed(config.seed ^ s, i)).points;
        text::write_file(out_path(sub, r.cloud), write_xyz(interpolate(chain, config.interp_factor).points));
        m.structures.push_back(std::move(r));
      }
      StageReport sub_report;
      cmd_ph(m, sub, sub_report);
      for (auto f : sub_report.failures) {
        f.stage = "noise " + dir + ": " + f.stage;
        report.failures.push_back(f);
      }
      const auto compared = cmd_compare(m, sub, config.metric, sub_report);
      for (const auto& w : sub_report.warnings) report.warnings.push_back(dir + ": " + w);
      row.silhouette_homology = compared.silhouette_homology;
      row.silhouette_depth = compared.silhouette_depth;
    } catch (const Error& e) {
      report.failures.push_back({dir, "noise", e.what()});
    }
    rows.push_back(row);
    table += short_number(sigma) + '\t' + optional_number(row.silhouette_homology) + '\t' +
             optional_number(row.silhouette_depth) + '\n';
  }
  text::write_file(out_path(config, "noise/robustness.tsv"), table);

  constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
  svg::Series homology{"homology", {}}, depth{"depth", {}};
  for (const auto& r : rows) {
    homology.points.push_back({r.sigma, r.silhouette_homology.value_or(kMissing)});
    depth.points.push_back({r.sigma, r.silhouette_depth.value_or(kMissing)});
  }
  text::write_file(out_path(config, "noise/robustness.svg"),
                   svg::line_plot("Silhouette under Gaussian noise", "sigma", {homology, depth}));
  manifest.artifacts["noise_robustness"] = "noise/robustness.tsv";
  manifest.artifacts["noise_robustness_plot"] = "noise/robustness.svg";
  save_manifest(manifest, config);
  return rows;
}

}  // namespace knotph
