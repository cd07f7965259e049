#include "knotph/persistence.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "knotph/error.hpp"
#include "knotph/text.hpp"

namespace knotph {
namespace {

std::vector<std::uint32_t> symmetric_difference(const std::vector<std::uint32_t>& a,
                                                const std::vector<std::uint32_t>& b) {
  std::vector<std::uint32_t> out;
  out.reserve(a.size() + b.size());
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (a < b) std::swap(a, b);
    parent_[a] = b;
    return true;
  }

 private:
  std::vector<std::uint32_t> parent_;
};

CycleRepresentative make_cycle(const std::vector<FilteredEdge>& edges,
                               const std::vector<std::uint32_t>& column) {
  CycleRepresentative cycle;
  cycle.edges.reserve(column.size());
  for (const auto idx : column) {
    const auto& e = edges[idx];
    cycle.edges.push_back({e.u, e.v, e.v - e.u == 1});
  }
  return cycle;
}

void check_cloud(const PointCloud& cloud, std::size_t min_points) {
  if (cloud.size() < min_points)
    throw EmptyInputError("cloud '" + cloud.source_id + "' has " + std::to_string(cloud.size()) +
                          " points, need at least " + std::to_string(min_points));
}

}  // namespace

std::vector<std::uint32_t> CycleRepresentative::vertices() const {
  std::vector<std::uint32_t> out;
  out.reserve(edges.size() * 2);
  for (const auto& e : edges) {
    out.push_back(e.u);
    out.push_back(e.v);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool is_cycle(const CycleRepresentative& cycle) {
  std::map<std::uint32_t, int> degree;
  for (const auto& e : cycle.edges) {
    ++degree[e.u];
    ++degree[e.v];
  }
  return std::all_of(degree.begin(), degree.end(), [](const auto& kv) { return kv.second % 2 == 0; });
}

void PersistenceDiagram::normalize() {
  std::stable_sort(pairs.begin(), pairs.end(), [](const PersistencePair& a, const PersistencePair& b) {
    return a.birth != b.birth ? a.birth < b.birth : a.death < b.death;
  });
}

double enclosing_radius(std::span<const Point3> points) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    double far = 0.0;
    for (std::size_t j = 0; j < points.size(); ++j)
      if (j != i) far = std::max(far, euclidean(points[i], points[j]));
    best = std::min(best, far);
  }
  return points.size() < 2 ? 0.0 : best;
}

std::vector<FilteredEdge> build_vr_edges(const PointCloud& cloud, MaxScale max_scale) {
  check_cloud(cloud, 2);
  if (!max_scale.is_auto() && !(max_scale.value() > 0.0))
    throw ParameterError("max_scale must be positive");
  const double threshold = max_scale.is_auto() ? enclosing_radius(cloud.points) : max_scale.value();
  std::vector<FilteredEdge> edges;
  const auto n = static_cast<std::uint32_t>(cloud.size());
  for (std::uint32_t u = 0; u < n; ++u)
    for (std::uint32_t v = u + 1; v < n; ++v) {
      const double d = euclidean(cloud.points[u], cloud.points[v]);
      if (d <= threshold) edges.push_back({u, v, d});
    }
  std::sort(edges.begin(), edges.end(), [](const FilteredEdge& a, const FilteredEdge& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.u != b.u) return a.u < b.u;
    return a.v < b.v;
  });
  return edges;
}

RipsPersistence::RipsPersistence(const PointCloud& cloud, MaxScale max_scale) {
  check_cloud(cloud, 3);
  if (!max_scale.is_auto() && !(max_scale.value() > 0.0))
    throw ParameterError("max_scale must be positive");
  if (cloud.size() >= (1u << 20)) throw SizeError("cloud too large for triangle keys");

  n_ = static_cast<std::uint32_t>(cloud.size());
  interp_factor_ = cloud.interp_factor;
  dist_.resize(static_cast<std::size_t>(n_) * n_);
  for (std::uint32_t i = 0; i < n_; ++i) {
    dist_[i * n_ + i] = 0.0;
    for (std::uint32_t j = i + 1; j < n_; ++j)
      dist_[i * n_ + j] = dist_[j * n_ + i] = euclidean(cloud.points[i], cloud.points[j]);
  }
  double radius = std::numeric_limits<double>::infinity();
  for (std::uint32_t i = 0; i < n_; ++i)
    radius = std::min(radius, *std::max_element(dist_.begin() + i * n_, dist_.begin() + (i + 1) * n_));

  const bool censor = !max_scale.is_auto() && max_scale.value() < radius;
  threshold_ = censor ? max_scale.value() : radius;
  cap_ = censor ? max_scale.value() : radius;

  for (std::uint32_t u = 0; u < n_; ++u)
    for (std::uint32_t v = u + 1; v < n_; ++v)
      if (dist(u, v) <= threshold_) edges_.push_back({u, v, dist(u, v)});
  std::sort(edges_.begin(), edges_.end(), [](const FilteredEdge& a, const FilteredEdge& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.u != b.u) return a.u < b.u;
    return a.v < b.v;
  });
  edge_index_.assign(static_cast<std::size_t>(n_) * n_, -1);
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    edge_index_[edges_[k].u * n_ + edges_[k].v] = static_cast<std::int32_t>(k);
    edge_index_[edges_[k].v * n_ + edges_[k].u] = static_cast<std::int32_t>(k);
  }
  edge_partner_.assign(edges_.size(), std::nullopt);

  reduce_coboundaries(censor);
}

std::uint64_t RipsPersistence::key(const Triangle& t) const noexcept {
  const std::uint64_t n = n_;
  return (static_cast<std::uint64_t>(t.a) * n + t.b) * n + t.c;
}

std::int32_t RipsPersistence::edge_id(std::uint32_t i, std::uint32_t j) const noexcept {
  return edge_index_[i * n_ + j];
}

std::optional<RipsPersistence::Triangle> RipsPersistence::smallest_cofacet(std::uint32_t edge) const {
  const auto& e = edges_[edge];
  const double* du = &dist_[e.u * n_];
  const double* dv = &dist_[e.v * n_];
  // With the diameter fixed, triangles order by their third vertex, so the
  // first w that does not lengthen the edge gives the minimum outright.
  std::optional<Triangle> best;
  for (std::uint32_t w = 0; w < n_; ++w) {
    if (w == e.u || w == e.v) continue;
    const double far = std::max(du[w], dv[w]);
    if (far > threshold_) continue;
    if (far <= e.value) return make_triangle(e.value, e.u, e.v, w);
    if (!best || far < best->diam) best = make_triangle(far, e.u, e.v, w);
  }
  return best;
}

RipsPersistence::Triangle RipsPersistence::make_triangle(double diam, std::uint32_t u, std::uint32_t v,
                                                         std::uint32_t w) noexcept {
  if (w < u) return {diam, w, u, v};
  if (w < v) return {diam, u, w, v};
  return {diam, u, v, w};
}

std::vector<std::uint32_t> RipsPersistence::boundary(const Triangle& t) const {
  std::vector<std::uint32_t> col = {static_cast<std::uint32_t>(edge_id(t.a, t.b)),
                                    static_cast<std::uint32_t>(edge_id(t.a, t.c)),
                                    static_cast<std::uint32_t>(edge_id(t.b, t.c))};
  std::sort(col.begin(), col.end());
  return col;
}

void RipsPersistence::reduce_coboundaries(bool censor) {
  const auto num_edges = static_cast<std::uint32_t>(edges_.size());

  // Spanning-forest edges kill H0 classes and never start a degree-1 column.
  std::vector<char> forest(num_edges, 0);
  {
    UnionFind uf(n_);
    for (std::uint32_t k = 0; k < num_edges; ++k) forest[k] = uf.unite(edges_[k].u, edges_[k].v);
  }

  std::unordered_map<std::uint64_t, std::uint32_t> pivot_column;  // triangle -> column
  std::vector<std::vector<std::uint32_t>> reduction;                // column -> edges combined
  pivot_column.reserve(num_edges);
  triangle_partner_.reserve(num_edges);

  // Column entries pack (diam, a, b, c) into one integer with the same order:
  // nonnegative doubles compare like their bit patterns.
  using Packed = unsigned __int128;
  const auto pack = [](const Triangle& t) {
    return (static_cast<Packed>(std::bit_cast<std::uint64_t>(t.diam)) << 64) |
           (static_cast<std::uint64_t>(t.a) << 40) | (static_cast<std::uint64_t>(t.b) << 20) | t.c;
  };
  const auto unpack = [](Packed k) {
    const auto low = static_cast<std::uint64_t>(k);
    return Triangle{std::bit_cast<double>(static_cast<std::uint64_t>(k >> 64)),
                    static_cast<std::uint32_t>(low >> 40), static_cast<std::uint32_t>((low >> 20) & 0xFFFFF),
                    static_cast<std::uint32_t>(low & 0xFFFFF)};
  };

  // Rank of each edge's value among the distinct edge values.
  std::vector<std::uint32_t> rank(num_edges);
  for (std::uint32_t k = 1; k < num_edges; ++k)
    rank[k] = rank[k - 1] + (edges_[k].value != edges_[k - 1].value ? 1 : 0);

  // Working column as a bucket queue over diameter ranks. Pivots only grow
  // while a column is reduced, so a cursor finds the next one; entries pushed
  // below the cursor come in cancelling pairs and are never looked at.
  std::vector<std::vector<Packed>> buckets(num_edges ? rank.back() + 1 : 0);
  std::vector<std::uint32_t> touched;
  std::uint32_t cursor = 0;
  bool dirty = false;
  const auto push = [&](std::uint32_t r, Packed k) {
    if (buckets[r].empty()) touched.push_back(r);
    buckets[r].push_back(k);
    if (r == cursor) dirty = true;
  };
  const auto push_cofacets = [&](std::uint32_t edge, double bound) {
    const auto& e = edges_[edge];
    if (e.value > bound) return;
    const double* du = &dist_[e.u * n_];
    const double* dv = &dist_[e.v * n_];
    for (std::uint32_t w = 0; w < n_; ++w) {
      if (w == e.u || w == e.v) continue;
      const double far = std::max(du[w], dv[w]);
      if (far > bound) continue;
      std::uint32_t r = rank[edge];
      if (far > e.value) r = rank[static_cast<std::uint32_t>(edge_id(du[w] >= dv[w] ? e.u : e.v, w))];
      push(r, pack(make_triangle(std::max(e.value, far), e.u, e.v, w)));
    }
  };
  const auto clear_column = [&] {
    for (const auto r : touched) buckets[r].clear();
    touched.clear();
  };
  const auto pivot_of = [&]() -> std::optional<Triangle> {
    for (; cursor < buckets.size(); ++cursor, dirty = true) {
      auto& b = buckets[cursor];
      if (b.empty()) continue;
      if (dirty) {
        std::sort(b.begin(), b.end());
        std::size_t out = 0;
        for (std::size_t i = 0; i < b.size();) {
          std::size_t j = i;
          while (j < b.size() && b[j] == b[i]) ++j;
          if ((j - i) % 2 == 1) b[out++] = b[i];
          i = j;
        }
        b.resize(out);
        dirty = false;
      }
      if (!b.empty()) return unpack(b.front());
    }
    return std::nullopt;
  };

  const auto record = [&](std::uint32_t edge, const Triangle& tri, std::vector<std::uint32_t> column) {
    pivot_column.emplace(key(tri), static_cast<std::uint32_t>(reduction.size()));
    reduction.push_back(std::move(column));
    triangle_partner_.emplace(key(tri), edge);
    edge_partner_[edge] = tri;
    if (tri.diam > edges_[edge].value) {
      diagram_.pairs.push_back({edges_[edge].value, tri.diam, false, std::nullopt});
      sources_.push_back({edge, tri});
    }
  };

  const auto record_essential = [&](std::uint32_t edge) {
    if (censor && cap_ > edges_[edge].value) {
      diagram_.pairs.push_back({edges_[edge].value, cap_, true, std::nullopt});
      sources_.push_back({edge, std::nullopt});
    }
  };

  // Reduces the coboundary of `idx` keeping only cofacets up to `bound`. The
  // smallest entries of a Z/2 sum do not depend on larger ones, so a pivot
  // found below the bound is exact; an empty result means "none below bound".
  std::vector<std::uint32_t> combined;
  const auto reduce = [&](std::uint32_t idx, double bound) -> std::optional<Triangle> {
    clear_column();
    cursor = 0;
    dirty = true;
    push_cofacets(idx, bound);
    combined.assign(1, idx);
    for (;;) {
      const auto pivot = pivot_of();
      if (!pivot) return std::nullopt;
      const auto it = pivot_column.find(key(*pivot));
      if (it == pivot_column.end()) return pivot;
      for (const auto other : reduction[it->second]) {
        combined.push_back(other);
        push_cofacets(other, bound);
      }
    }
  };

  for (std::uint32_t idx = num_edges; idx-- > 0;) {
    if (forest[idx]) continue;
    const auto smallest = smallest_cofacet(idx);
    if (!smallest) {
      record_essential(idx);
      continue;
    }
    if (!pivot_column.contains(key(*smallest))) {
      record(idx, *smallest, {idx});
      continue;
    }

    std::optional<Triangle> pivot;
    for (double bound = 2 * smallest->diam;; bound *= 2) {
      if (bound >= threshold_) {
        pivot = reduce(idx, threshold_);
        break;
      }
      if ((pivot = reduce(idx, bound))) break;
    }
    if (!pivot) {
      record_essential(idx);
      continue;
    }
    std::sort(combined.begin(), combined.end());
    std::vector<std::uint32_t> reduced;
    for (std::size_t i = 0; i < combined.size();) {
      std::size_t j = i;
      while (j < combined.size() && combined[j] == combined[i]) ++j;
      if ((j - i) % 2 == 1) reduced.push_back(combined[i]);
      i = j;
    }
    record(idx, *pivot, std::move(reduced));
  }

  // Keep sources aligned with the sorted pairs.
  std::vector<std::size_t> order(diagram_.pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& pa = diagram_.pairs[a];
    const auto& pb = diagram_.pairs[b];
    return pa.birth != pb.birth ? pa.birth < pb.birth : pa.death < pb.death;
  });
  PersistenceDiagram sorted;
  std::vector<PairSource> sorted_sources;
  for (const auto i : order) {
    sorted.pairs.push_back(diagram_.pairs[i]);
    sorted_sources.push_back(sources_[i]);
  }
  diagram_.pairs = std::move(sorted.pairs);
  sources_ = std::move(sorted_sources);
}

CycleRepresentative RipsPersistence::representative(std::size_t index) const {
  if (index >= sources_.size()) throw UnknownPairError("pair index out of range");
  const auto& src = sources_[index];
  if (!src.death_triangle)
    throw UnknownPairError("censored pair has no death triangle; raise max_scale to resolve it");

  // Homology-mode reduction restricted to the death triangles that the target
  // column actually touches. A column is reduced by adding the reduced column of
  // the triangle paired with its current lowest edge until that edge is its own
  // partner; this replays standard left-to-right reduction exactly.
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> done;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> working;
  std::vector<Triangle> stack = {*src.death_triangle};
  while (!stack.empty()) {
    const Triangle t = stack.back();
    const auto k = key(t);
    auto [it, fresh] = working.try_emplace(k);
    if (fresh) it->second = boundary(t);
    auto& col = it->second;
    const std::uint32_t partner = triangle_partner_.at(k);
    bool blocked = false;
    while (!col.empty() && col.back() != partner) {
      const std::uint32_t low = col.back();
      if (low < partner || !edge_partner_[low])
        throw std::logic_error("representative reduction left the pairing");
      const Triangle other = *edge_partner_[low];
      const auto found = done.find(key(other));
      if (found == done.end()) {
        stack.push_back(other);
        blocked = true;
        break;
      }
      col = symmetric_difference(col, found->second);
    }
    if (blocked) continue;
    done.emplace(k, std::move(col));
    working.erase(k);
    stack.pop_back();
  }
  return make_cycle(edges_, done.at(key(*src.death_triangle)));
}

CycleRepresentative RipsPersistence::representative(const PersistencePair& pair) const {
  for (std::size_t i = 0; i < diagram_.pairs.size(); ++i)
    if (diagram_.pairs[i].birth == pair.birth && diagram_.pairs[i].death == pair.death)
      return representative(i);
  throw UnknownPairError("pair (" + text::format_double(pair.birth) + ", " +
                         text::format_double(pair.death) + ") is not in the diagram");
}

PersistenceDiagram compute_ph1(const PointCloud& cloud, MaxScale max_scale) {
  RipsPersistence ph(cloud, max_scale);
  PersistenceDiagram out = ph.diagram();
  out.source_id = cloud.source_id;
  return out;
}

CycleRepresentative compute_generator(const PointCloud& cloud, const PersistencePair& pair,
                                      MaxScale max_scale) {
  return RipsPersistence(cloud, max_scale).representative(pair);
}

PersistenceDiagram brute_force_ph(const PointCloud& cloud, bool with_generators) {
  if (cloud.size() > 16)
    throw SizeError("brute-force persistence is limited to 16 points, got " +
                    std::to_string(cloud.size()));
  check_cloud(cloud, 1);
  const auto n = static_cast<std::uint32_t>(cloud.size());
  std::vector<double> d(n * n, 0.0);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < n; ++j) d[i * n + j] = euclidean(cloud.points[i], cloud.points[j]);

  struct Simplex {
    double value;
    int dim;
    std::vector<std::uint32_t> verts;
  };
  std::vector<Simplex> simplices;
  for (std::uint32_t i = 0; i < n; ++i) simplices.push_back({0.0, 0, {i}});
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j) simplices.push_back({d[i * n + j], 1, {i, j}});
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j)
      for (std::uint32_t k = j + 1; k < n; ++k)
        simplices.push_back(
            {std::max({d[i * n + j], d[i * n + k], d[j * n + k]}), 2, {i, j, k}});
  std::sort(simplices.begin(), simplices.end(), [](const Simplex& a, const Simplex& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.dim != b.dim) return a.dim < b.dim;
    return a.verts < b.verts;
  });

  std::map<std::vector<std::uint32_t>, std::uint32_t> position;
  for (std::uint32_t i = 0; i < simplices.size(); ++i) position[simplices[i].verts] = i;

  std::vector<std::vector<std::uint32_t>> columns(simplices.size());
  for (std::uint32_t i = 0; i < simplices.size(); ++i) {
    const auto& s = simplices[i].verts;
    if (s.size() < 2) continue;
    for (std::size_t drop = 0; drop < s.size(); ++drop) {
      std::vector<std::uint32_t> face;
      for (std::size_t t = 0; t < s.size(); ++t)
        if (t != drop) face.push_back(s[t]);
      columns[i].push_back(position.at(face));
    }
    std::sort(columns[i].begin(), columns[i].end());
  }

  PersistenceDiagram out;
  out.source_id = cloud.source_id;
  std::vector<std::int64_t> owner(simplices.size(), -1);
  for (std::uint32_t j = 0; j < columns.size(); ++j) {
    auto& col = columns[j];
    while (!col.empty() && owner[col.back()] >= 0) col = symmetric_difference(col, columns[owner[col.back()]]);
    if (col.empty()) continue;
    owner[col.back()] = j;
    const auto& birth = simplices[col.back()];
    const auto& death = simplices[j];
    if (birth.dim == 1 && death.value > birth.value) {
      PersistencePair pair{birth.value, death.value, false, std::nullopt};
      if (with_generators) {
        CycleRepresentative cycle;
        for (const auto e : col) {
          const auto& ev = simplices[e].verts;
          cycle.edges.push_back({ev[0], ev[1], ev[1] - ev[0] == 1});
        }
        pair.generator = std::move(cycle);
      }
      out.pairs.push_back(std::move(pair));
    }
  }
  out.normalize();
  return out;
}

double cycle_core_overlap(const CycleRepresentative& cycle, const PointCloud& cloud,
                          const KnotAnnotation& annotation) {
  const auto verts = cycle.vertices();
  if (verts.empty()) return 0.0;
  std::size_t inside = 0;
  for (const auto v : verts) {
    if (v >= cloud.size()) throw ParameterError("cycle vertex outside the cloud");
    const auto b = backbone_index(v, cloud.interp_factor);
    if (b >= annotation.core_start && b <= annotation.core_end) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(verts.size());
}

std::string write_diagram_csv(const PersistenceDiagram& diagram) {
  PersistenceDiagram sorted = diagram;
  sorted.normalize();
  std::string out = "birth,death\n";
  for (const auto& p : sorted.pairs) {
    out += text::format_double(p.birth);
    out += ',';
    out += text::format_double(p.death);
    out += '\n';
  }
  return out;
}

PersistenceDiagram read_diagram_csv(std::string_view content, std::string source_id) {
  PersistenceDiagram out;
  out.source_id = std::move(source_id);
  const auto all = text::lines(content);
  if (all.empty() || text::trim(all.front()) != "birth,death")
    throw ParseError("diagram CSV must start with 'birth,death'", 1);
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (text::trim(all[i]).empty()) continue;
    const auto fields = text::split(all[i], ',');
    if (fields.size() != 2) throw ParseError("expected 2 fields", i + 1);
    const auto b = text::to_double(fields[0]);
    const auto d = text::to_double(fields[1]);
    if (!b || !d || !(*b < *d)) throw ParseError("invalid pair", i + 1);
    out.pairs.push_back({*b, *d, false, std::nullopt});
  }
  return out;
}

std::string write_generator_csv(const CycleRepresentative& cycle) {
  std::string out = "u,v,on_backbone\n";
  for (const auto& e : cycle.edges) {
    out += std::to_string(e.u) + ',' + std::to_string(e.v) + ',' + (e.on_backbone ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace knotph
