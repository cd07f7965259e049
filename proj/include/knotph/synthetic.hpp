#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "knotph/geometry.hpp"

namespace knotph {

/// Shape of a synthetic open trefoil: a trefoil knot opened at an outer lobe,
/// with straight tails leaving along the tangent at each cut end.
struct TrefoilShape {
  std::size_t n_tail = 0;
  std::size_t core = 20;
  std::size_t c_tail = 0;
  double spacing = 3.8;
  /// Standard deviation of the Gaussian offset added to every residue.
  double jitter = 0.3;
};

/// Residue i sits at arc length i * spacing along the curve, so the core
/// occupies indices [n_tail, n_tail + core - 1]; the returned chain carries
/// that annotation.
BackboneChain open_trefoil(std::string id, const TrefoilShape& shape, std::uint64_t seed);

/// Open trefoils of 108 to 127 residues: `n_deep` with a small core (18 to 22
/// residues) centred between long tails, `n_shallow` whose core spans all but
/// 1 to 4 terminal residues. Ids are deep_NN and shallow_NN.
std::vector<BackboneChain> trefoil_dataset(std::size_t n_deep, std::size_t n_shallow, std::uint64_t seed);

/// Writes each chain as `<id>.xyz` plus an `annotations.tsv` sidecar into `dir`.
void write_dataset(const std::filesystem::path& dir, const std::vector<BackboneChain>& chains);

}  // namespace knotph
