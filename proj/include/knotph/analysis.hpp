#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "knotph/diagram_metrics.hpp"

namespace knotph {

struct Embedding {
  std::vector<std::string> ids;
  /// Row-major, ids.size() x dim.
  std::vector<double> coords;
  std::size_t dim = 0;
  std::size_t n_neighbors = 0;

  double at(std::size_t row, std::size_t col) const noexcept { return coords[row * dim + col]; }
};

struct ClusterLabels {
  std::vector<std::string> ids;
  std::vector<std::string> labels;
};

/// Geodesic distances over the symmetrised k-nearest-neighbour graph (an edge
/// when either endpoint lists the other). Throws ConnectivityError listing the
/// components when the graph is disconnected.
std::vector<double> knn_geodesics(const DistanceMatrix& dm, std::size_t n_neighbors);

/// Isomap: kNN geodesics, then classical MDS. Each column is sign-fixed so its
/// largest-magnitude entry is positive.
Embedding isomap_embed(const DistanceMatrix& dm, std::size_t n_neighbors, std::size_t dim = 2);

/// Classical MDS of a full distance matrix (row-major n x n).
std::vector<double> classical_mds(const std::vector<double>& dist, std::size_t n, std::size_t dim);

/// Mean silhouette coefficient; singleton clusters score 0.
double silhouette(const DistanceMatrix& dm, const ClusterLabels& labels);
/// Same, on Euclidean distances between embedding rows.
double silhouette(const Embedding& e, const ClusterLabels& labels);

/// Single linkage on 1 - sim, cut at `threshold`. Each cluster is named after
/// its lexicographically smallest member id.
ClusterLabels single_linkage_clusters(const DistanceMatrix& sim, double threshold = 0.7);

/// Keeps the k largest clusters (ties: smallest member id wins); the rest become "Other".
ClusterLabels top_k_classes(const ClusterLabels& labels, std::size_t k);

/// `id<TAB>label` lines.
std::string write_labels_tsv(const ClusterLabels& labels);
ClusterLabels read_labels_tsv(std::string_view content);

/// `id,x,y[,...]` with a header row.
std::string write_embedding_csv(const Embedding& e);

}  // namespace knotph
