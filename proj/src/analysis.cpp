#include "knotph/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>

#include "knotph/error.hpp"
#include "knotph/text.hpp"

namespace knotph {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a), b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

template <class Dist>
double silhouette_impl(std::size_t n, const ClusterLabels& labels, Dist dist) {
  if (labels.labels.size() != n) throw ParameterError("every point needs a label");
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[labels.labels[i]].push_back(i);
  if (groups.size() < 2) throw UndefinedSilhouetteError("silhouette needs at least two clusters");

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& own = groups[labels.labels[i]];
    if (own.size() == 1) continue;
    double a = 0.0;
    for (const auto j : own)
      if (j != i) a += dist(i, j);
    a /= static_cast<double>(own.size() - 1);
    double b = kInf;
    for (const auto& [name, members] : groups) {
      if (name == labels.labels[i]) continue;
      double s = 0.0;
      for (const auto j : members) s += dist(i, j);
      b = std::min(b, s / static_cast<double>(members.size()));
    }
    const double m = std::max(a, b);
    if (m > 0.0) total += (b - a) / m;
  }
  return total / static_cast<double>(n);
}

}  // namespace

std::vector<double> knn_geodesics(const DistanceMatrix& dm, std::size_t n_neighbors) {
  const std::size_t n = dm.size();
  if (n < 2) throw ParameterError("need at least two items to embed");
  if (n_neighbors < 1 || n_neighbors >= n)
    throw ParameterError("n_neighbors must lie in [1, " + std::to_string(n - 1) + "]");

  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  std::vector<char> linked(n * n, 0);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i) {
    order.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) order.push_back(j);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_neighbors), order.end(),
                      [&](std::size_t x, std::size_t y) { return dm(i, x) != dm(i, y) ? dm(i, x) < dm(i, y) : x < y; });
    for (std::size_t r = 0; r < n_neighbors; ++r) {
      const std::size_t j = order[r];
      if (linked[i * n + j]) continue;
      linked[i * n + j] = linked[j * n + i] = 1;
      adj[i].push_back({j, dm(i, j)});
      adj[j].push_back({i, dm(i, j)});
    }
  }

  DisjointSets sets(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [j, w] : adj[i]) sets.unite(i, j);
  std::map<std::size_t, std::vector<std::string>> components;
  for (std::size_t i = 0; i < n; ++i) components[sets.find(i)].push_back(dm.ids()[i]);
  if (components.size() > 1) {
    std::string msg = "neighbour graph has " + std::to_string(components.size()) + " components:";
    for (const auto& [root, members] : components) {
      msg += " {";
      for (std::size_t m = 0; m < members.size(); ++m) msg += (m ? "," : "") + members[m];
      msg += '}';
    }
    throw ConnectivityError(msg + "; raise n_neighbors");
  }

  std::vector<double> geo(n * n, kInf);
  using Item = std::pair<double, std::size_t>;
  for (std::size_t s = 0; s < n; ++s) {
    double* row = &geo[s * n];
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    row[s] = 0.0;
    heap.push({0.0, s});
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d > row[u]) continue;
      for (const auto& [v, w] : adj[u])
        if (d + w < row[v]) {
          row[v] = d + w;
          heap.push({row[v], v});
        }
    }
  }
  // Symmetrise so the MDS input does not depend on summation order.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) geo[i * n + j] = geo[j * n + i] = std::min(geo[i * n + j], geo[j * n + i]);
  return geo;
}

std::vector<double> classical_mds(const std::vector<double>& dist, std::size_t n, std::size_t dim) {
  if (dim < 1 || dim > n) throw ParameterError("embedding dimension must lie in [1, n]");
  Eigen::MatrixXd b(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b(i, j) = dist[i * n + j] * dist[i * n + j];
  const Eigen::VectorXd row_mean = b.rowwise().mean();
  const Eigen::VectorXd col_mean = b.colwise().mean();
  const double all_mean = b.mean();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b(i, j) = -0.5 * (b(i, j) - row_mean(i) - col_mean(j) + all_mean);

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  if (solver.info() != Eigen::Success) throw DegenerateGeometryError("eigen-decomposition failed");
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();

  // Eigenvalues within rounding of zero count as non-positive.
  const double tol = 1e-9 * std::max(values.cwiseAbs().maxCoeff(), 1e-300);
  std::vector<double> coords(n * dim);
  for (std::size_t c = 0; c < dim; ++c) {
    const auto idx = static_cast<Eigen::Index>(n - 1 - c);
    const double lambda = values(idx);
    if (!(lambda > tol))
      throw DegenerateGeometryError("eigenvalue " + std::to_string(c + 1) + " of the centred Gram matrix is " +
                                    text::format_double(lambda, 6) + "; the geometry has fewer than " +
                                    std::to_string(dim) + " positive directions");
    Eigen::VectorXd v = vectors.col(idx);
    Eigen::Index big = 0;
    for (Eigen::Index r = 1; r < v.size(); ++r)
      if (std::abs(v(r)) > std::abs(v(big))) big = r;
    if (v(big) < 0) v = -v;
    const double scale = std::sqrt(lambda);
    for (std::size_t r = 0; r < n; ++r) coords[r * dim + c] = v(static_cast<Eigen::Index>(r)) * scale;
  }
  return coords;
}

Embedding isomap_embed(const DistanceMatrix& dm, std::size_t n_neighbors, std::size_t dim) {
  Embedding e;
  e.ids = dm.ids();
  e.dim = dim;
  e.n_neighbors = n_neighbors;
  e.coords = classical_mds(knn_geodesics(dm, n_neighbors), dm.size(), dim);
  return e;
}

double silhouette(const DistanceMatrix& dm, const ClusterLabels& labels) {
  return silhouette_impl(dm.size(), labels, [&](std::size_t i, std::size_t j) { return dm(i, j); });
}

double silhouette(const Embedding& e, const ClusterLabels& labels) {
  return silhouette_impl(e.ids.size(), labels, [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < e.dim; ++c) {
      const double d = e.at(i, c) - e.at(j, c);
      s += d * d;
    }
    return std::sqrt(s);
  });
}

ClusterLabels single_linkage_clusters(const DistanceMatrix& sim, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ParameterError("threshold must lie in (0, 1)");
  const std::size_t n = sim.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!(sim(i, j) >= 0.0 && sim(i, j) <= 1.0))
        throw NormalizationError("similarity between " + sim.ids()[i] + " and " + sim.ids()[j] +
                                 " is outside [0, 1]");
  // Cutting a single-linkage dendrogram at h gives the components of the
  // graph joining every pair at distance <= h.
  DisjointSets sets(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (1.0 - sim(i, j) <= threshold) sets.unite(i, j);
  std::map<std::size_t, std::string> name;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, fresh] = name.try_emplace(sets.find(i), sim.ids()[i]);
    if (!fresh && sim.ids()[i] < it->second) it->second = sim.ids()[i];
  }
  ClusterLabels out;
  out.ids = sim.ids();
  for (std::size_t i = 0; i < n; ++i) out.labels.push_back(name[sets.find(i)]);
  return out;
}

ClusterLabels top_k_classes(const ClusterLabels& labels, std::size_t k) {
  if (k < 1) throw ParameterError("k must be at least 1");
  struct Group {
    std::size_t size = 0;
    std::string smallest;
  };
  std::map<std::string, Group> groups;
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    auto& g = groups[labels.labels[i]];
    if (g.size++ == 0 || labels.ids[i] < g.smallest) g.smallest = labels.ids[i];
  }
  std::vector<std::pair<std::string, Group>> ranked(groups.begin(), groups.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
    return x.second.size != y.second.size ? x.second.size > y.second.size : x.second.smallest < y.second.smallest;
  });
  std::map<std::string, bool> keep;
  for (std::size_t r = 0; r < ranked.size(); ++r) keep[ranked[r].first] = r < k;
  ClusterLabels out = labels;
  for (auto& l : out.labels)
    if (!keep[l]) l = "Other";
  return out;
}

std::string write_labels_tsv(const ClusterLabels& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.ids.size(); ++i) out += labels.ids[i] + '\t' + labels.labels[i] + '\n';
  return out;
}

ClusterLabels read_labels_tsv(std::string_view content) {
  ClusterLabels out;
  const auto all = text::lines(content);
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (text::trim(all[i]).empty()) continue;
    const auto fields = text::split(all[i], '\t');
    if (fields.size() != 2 || text::trim(fields[0]).empty()) throw ParseError("expected 'id<TAB>label'", i + 1);
    out.ids.emplace_back(text::trim(fields[0]));
    out.labels.emplace_back(text::trim(fields[1]));
  }
  return out;
}

std::string write_embedding_csv(const Embedding& e) {
  static const char* const names[] = {"x", "y", "z"};
  std::string out = "id";
  for (std::size_t c = 0; c < e.dim; ++c) out += ',' + (c < 3 ? std::string(names[c]) : "c" + std::to_string(c + 1));
  out += '\n';
  for (std::size_t r = 0; r < e.ids.size(); ++r) {
    out += e.ids[r];
    for (std::size_t c = 0; c < e.dim; ++c) out += ',' + text::format_double(e.at(r, c), 12);
    out += '\n';
  }
  return out;
}

}  // namespace knotph
