#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "knotph/persistence.hpp"

namespace knotph {

/// W_p[L_q]. Either exponent may be infinite; the defaults give W_1[L_inf].
struct WassersteinParams {
  double p = 1.0;
  double q = std::numeric_limits<double>::infinity();
};

/// Symmetric nonnegative matrix over labelled items, zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::vector<std::string> ids);

  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * ids_.size() + j]; }
  /// Sets both (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, double v) noexcept;

  DistanceMatrix subset(std::span<const std::size_t> rows) const;

 private:
  std::vector<std::string> ids_;
  std::vector<double> values_;
};

/// Corner cell `id`, then ids across the first row and down the first column; 12 significant digits.
std::string write_distance_csv(const DistanceMatrix& m);
/// Reads the CSV layout above; checks squareness, matching labels and symmetry.
DistanceMatrix read_distance_csv(std::string_view content);

/// Ground cost between two diagram points under L_q.
double ground_cost(const PersistencePair& a, const PersistencePair& b, double q) noexcept;
/// L_q distance from a point to its diagonal projection ((b+d)/2, (b+d)/2).
double diagonal_cost(const PersistencePair& a, double q) noexcept;

/// Optimal partial-matching distance, solved exactly as a perfect matching on
/// the diagram points plus one diagonal proxy per point.
double wasserstein(const PersistenceDiagram& d1, const PersistenceDiagram& d2,
                   const WassersteinParams& params = {});

/// Distances over all unordered pairs; ids come from each diagram's source_id.
DistanceMatrix pairwise_wasserstein(std::span<const PersistenceDiagram> diagrams,
                                    const WassersteinParams& params = {});

/// Minimum-cost perfect matching on a dense square cost matrix (row-major).
/// Returns the column assigned to each row.
std::vector<std::size_t> min_cost_assignment(std::span<const double> cost, std::size_t n);

}  // namespace knotph
