#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "knotph/persistence.hpp"

namespace knotph {

struct CriticalPoint {
  double t = 0.0;
  double value = 0.0;

  friend bool operator==(const CriticalPoint&, const CriticalPoint&) = default;
};

/// Piecewise-linear function through strictly t-increasing critical points,
/// zero outside [front().t, back().t].
using LandscapeLayer = std::vector<CriticalPoint>;

/// layers[0] is lambda_1.
struct Landscape {
  std::vector<LandscapeLayer> layers;

  friend bool operator==(const Landscape&, const Landscape&) = default;
};

struct LandscapeSample {
  std::string label;
  std::vector<Landscape> landscapes;
};

/// f_I(t) for a single diagram point: the tent of height (d - b) / 2 over [b, d].
double tent(const PersistencePair& pair, double t) noexcept;

/// Exact landscape by the sweep over tents ordered by (birth asc, death desc):
/// each layer follows the current tent until a later tent with a larger death
/// crosses it, and the part of the old tent that was passed over is queued
/// for the next layer.
Landscape diagram_to_landscape(const PersistenceDiagram& diagram);

/// lambda_k(t); zero outside the support or past the last layer. k is 1-based.
double landscape_eval(const Landscape& l, std::size_t k, double t);

/// (sum_k integral |lambda_k|^p)^(1/p) in closed form. Integer p >= 1 only.
double landscape_lp_norm(const Landscape& l, double p);

/// ||l1 - l2||_p with layers differenced on the merged critical-point grid.
double landscape_distance(const Landscape& l1, const Landscape& l2, double p);

/// sum over k in `layers` of integral |lambda1_k - lambda2_k|.
double layer_restricted_distance(const Landscape& l1, const Landscape& l2, const std::set<int>& layers);

/// Pointwise mean of every layer on the union of the members' grids.
Landscape average_landscape(const LandscapeSample& sample);

struct RandomizationResult {
  double t_obs = 0.0;
  double p_value = 0.0;
  std::size_t draws = 0;
  std::uint64_t seed = 0;
};

/// Monte Carlo permutation test on ||mean(a) - mean(b)||_p. Draw i shuffles the
/// pooled indices (Fisher-Yates) with a SplitMix64 stream seeded by
/// derive_seed(seed, i) and takes the first |a| as the first group. The p-value
/// is the fraction of draws whose statistic reaches the observed one; the
/// observed split is not added to the draws.
RandomizationResult randomization_test(const LandscapeSample& a, const LandscapeSample& b, std::size_t k,
                                       std::uint64_t seed, double norm_p = 1.0);

struct LayerPeak {
  double t = 0.0;
  double height = 0.0;
};

/// Global maximiser of lambda_k (leftmost on ties), or with `near` the local
/// maximum closest to it. Throws NoSuchLayerError.
LayerPeak find_layer_peak(const Landscape& l, std::size_t k, std::optional<double> near = std::nullopt);

/// Index of the diagram pair whose tent is the k-th largest at t (ties to the
/// lower index).
std::size_t pair_at(const PersistenceDiagram& diagram, std::size_t k, double t);

/// `.lan` text: `#landscape v1`, then `#lambda <k>` and `t value` lines per nonempty layer.
std::string write_lan(const Landscape& l);
Landscape read_lan(std::string_view content);

}  // namespace knotph
