#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "knotph/geometry.hpp"

namespace knotph {

/// Upper bound on the Rips scale. `automatic()` resolves to the enclosing radius
/// of the cloud, past which no degree-1 class survives.
class MaxScale {
 public:
  static MaxScale automatic() noexcept { return MaxScale(); }
  static MaxScale fixed(double value) noexcept { return MaxScale(value); }

  bool is_auto() const noexcept { return !value_.has_value(); }
  double value() const { return value_.value(); }

 private:
  MaxScale() = default;
  explicit MaxScale(double v) : value_(v) {}
  std::optional<double> value_;
};

struct FilteredEdge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  double value = 0.0;

  friend bool operator==(const FilteredEdge&, const FilteredEdge&) = default;
};

struct CycleEdge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  /// True iff u and v are consecutive cloud indices.
  bool on_backbone = false;

  friend bool operator==(const CycleEdge&, const CycleEdge&) = default;
};

/// A Z/2 1-cycle given by its edges.
struct CycleRepresentative {
  std::vector<CycleEdge> edges;

  /// Distinct vertices in ascending order.
  std::vector<std::uint32_t> vertices() const;
};

/// True iff every vertex has even degree in `cycle`.
bool is_cycle(const CycleRepresentative& cycle);

struct PersistencePair {
  double birth = 0.0;
  double death = 0.0;
  /// Set when the class was still alive at an explicit scale cap; death is the cap.
  bool censored = false;
  std::optional<CycleRepresentative> generator;

  double persistence() const noexcept { return death - birth; }
};

struct PersistenceDiagram {
  int degree = 1;
  std::vector<PersistencePair> pairs;
  std::string source_id;

  /// Sorts pairs by (birth, death).
  void normalize();
};

/// min over points of the max distance to every other point.
double enclosing_radius(std::span<const Point3> points);

/// All point pairs within the scale, sorted by (value, u, v).
std::vector<FilteredEdge> build_vr_edges(const PointCloud& cloud,
                                         MaxScale max_scale = MaxScale::automatic());

/// Degree-1 persistent homology of a Vietoris-Rips filtration over Z/2.
///
/// Pairs are found by reducing the coboundary matrix (edges against triangles)
/// in reverse filtration order, skipping spanning-forest edges and accepting a
/// column untouched when its smallest cofacet is not yet a pivot. Simplices are
/// totally ordered by (value, dimension, lexicographic vertex tuple); the same
/// order drives the homology-mode reduction that produces representatives, so
/// both phases agree on every pair.
///
/// The object holds the full edge set and the pairing; a few hundred points
/// cost a few megabytes.
class RipsPersistence {
 public:
  RipsPersistence(const PointCloud& cloud, MaxScale max_scale = MaxScale::automatic());

  /// Pairs with positive persistence, sorted by (birth, death).
  const PersistenceDiagram& diagram() const noexcept { return diagram_; }

  /// Reduced boundary column of the death triangle of `diagram().pairs[index]`:
  /// a cycle whose youngest edge is the birth edge.
  CycleRepresentative representative(std::size_t index) const;

  /// Looks the pair up by exact (birth, death); throws UnknownPairError.
  CycleRepresentative representative(const PersistencePair& pair) const;

  double threshold() const noexcept { return threshold_; }
  const std::vector<FilteredEdge>& edges() const noexcept { return edges_; }

 private:
  struct Triangle {
    double diam;
    std::uint32_t a, b, c;
    auto operator<=>(const Triangle&) const = default;
  };

  double dist(std::uint32_t i, std::uint32_t j) const noexcept { return dist_[i * n_ + j]; }
  std::uint64_t key(const Triangle& t) const noexcept;
  std::int32_t edge_id(std::uint32_t i, std::uint32_t j) const noexcept;
  std::optional<Triangle> smallest_cofacet(std::uint32_t edge) const;
  static Triangle make_triangle(double diam, std::uint32_t u, std::uint32_t v, std::uint32_t w) noexcept;
  std::vector<std::uint32_t> boundary(const Triangle& t) const;
  void reduce_coboundaries(bool censor);

  std::uint32_t n_ = 0;
  int interp_factor_ = 0;
  double threshold_ = 0.0;
  double cap_ = 0.0;
  std::vector<double> dist_;
  std::vector<FilteredEdge> edges_;
  std::vector<std::int32_t> edge_index_;
  // Triangle paired with each positive edge (all pairs, including zero persistence).
  std::vector<std::optional<Triangle>> edge_partner_;
  // Edge paired with each death triangle.
  std::unordered_map<std::uint64_t, std::uint32_t> triangle_partner_;

  struct PairSource {
    std::uint32_t birth_edge;
    std::optional<Triangle> death_triangle;
  };
  PersistenceDiagram diagram_;
  std::vector<PairSource> sources_;  // parallel to diagram_.pairs
};

PersistenceDiagram compute_ph1(const PointCloud& cloud, MaxScale max_scale = MaxScale::automatic());

CycleRepresentative compute_generator(const PointCloud& cloud, const PersistencePair& pair,
                                      MaxScale max_scale = MaxScale::automatic());

/// Textbook reduction of the full boundary matrix of all simplices up to
/// dimension 2. Limited to 16 points. With `with_generators` each pair carries
/// the reduced column of its death triangle.
PersistenceDiagram brute_force_ph(const PointCloud& cloud, bool with_generators = false);

/// Fraction of the cycle's distinct vertices whose backbone index lies in the knot core.
double cycle_core_overlap(const CycleRepresentative& cycle, const PointCloud& cloud,
                          const KnotAnnotation& annotation);

/// `birth,death` CSV sorted by (birth, death), 17 significant digits.
std::string write_diagram_csv(const PersistenceDiagram& diagram);
PersistenceDiagram read_diagram_csv(std::string_view content, std::string source_id = {});

/// `u,v,on_backbone` CSV.
std::string write_generator_csv(const CycleRepresentative& cycle);

}  // namespace knotph
