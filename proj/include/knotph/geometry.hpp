#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace knotph {

/// A point in R^3, coordinates in angstroms.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
  Point3 operator+(const Point3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Point3 operator-(const Point3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Point3 operator*(double s) const { return {x * s, y * s, z * s}; }
  bool finite() const;
};

/// Euclidean distance. Every filtration value in the library goes through this
/// routine so that independent computations agree bit for bit.
double euclidean(const Point3& a, const Point3& b) noexcept;

enum class DepthClass { kDeep, kShallow, kNeither };

std::string_view to_string(DepthClass c) noexcept;
std::optional<DepthClass> parse_depth_class(std::string_view s) noexcept;

/// Position of the knot core along a chain. Tail lengths count C-alpha atoms.
struct KnotAnnotation {
  std::size_t core_start = 0;
  std::size_t core_end = 0;
  std::size_t n_tail_len = 0;
  std::size_t c_tail_len = 0;
  DepthClass depth_class = DepthClass::kNeither;

  /// Builds an annotation for a chain of `length` atoms; tails and depth class are derived.
  static KnotAnnotation from_core(std::size_t length, std::size_t core_start, std::size_t core_end);
};

struct BackboneChain {
  std::string id;
  std::vector<Point3> points;
  std::optional<KnotAnnotation> annotation;

  std::size_t length() const noexcept { return points.size(); }
  /// Throws ParseError if the chain is shorter than 2 or has repeated consecutive points.
  void validate() const;
};

struct PointCloud {
  std::string source_id;
  std::vector<Point3> points;
  int interp_factor = 0;

  std::size_t size() const noexcept { return points.size(); }
};

/// Parses a `.xyz` backbone: 3 columns (x y z) or 4 columns (residue x y z).
BackboneChain parse_xyz(std::string_view text, std::string id = {});

/// Writes points as `x y z` lines with 17 significant digits.
std::string write_xyz(std::span<const Point3> points);

/// C-alpha trace of one chain from fixed-column PDB ATOM records (first model,
/// altLoc blank or 'A').
BackboneChain extract_ca_from_pdb(std::string_view text, std::string_view chain_id);

/// Inserts `d` equidistant points on every backbone segment.
PointCloud interpolate(const BackboneChain& chain, int d);

/// Backbone index of a cloud point, i.e. floor(cloud_index / (d + 1)).
std::size_t backbone_index(std::size_t cloud_index, int interp_factor) noexcept;

/// l(N) l(C) / l(T)^2.
double knot_depth(const BackboneChain& chain);
double knot_depth(std::size_t length, std::size_t n_tail_len, std::size_t c_tail_len);

/// deep above 0.05, shallow below 0.005, neither otherwise (boundaries are neither).
DepthClass classify_depth(double depth) noexcept;

/// Adds i.i.d. N(0, sigma^2) offsets to every coordinate, drawn x, y, z per point
/// in cloud order from a Box-Muller sampler seeded with `seed`.
PointCloud perturb(const PointCloud& cloud, double sigma, std::uint64_t seed);

/// One row of the annotation sidecar TSV.
struct AnnotationRecord {
  std::string id;
  std::size_t length = 0;
  std::size_t core_start = 0;
  std::size_t core_end = 0;
  std::string homology_class;
};

/// Reads the sidecar TSV (`id length core_start core_end homology_class`, header required).
std::map<std::string, AnnotationRecord> parse_annotation_tsv(std::string_view text);

}  // namespace knotph
