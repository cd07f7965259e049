#include "knotph/diagram_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "knotph/error.hpp"
#include "knotph/text.hpp"

namespace knotph {

DistanceMatrix::DistanceMatrix(std::vector<std::string> ids)
    : ids_(std::move(ids)), values_(ids_.size() * ids_.size(), 0.0) {}

void DistanceMatrix::set(std::size_t i, std::size_t j, double v) noexcept {
  values_[i * ids_.size() + j] = v;
  values_[j * ids_.size() + i] = v;
}

DistanceMatrix DistanceMatrix::subset(std::span<const std::size_t> rows) const {
  std::vector<std::string> ids;
  for (const auto r : rows) ids.push_back(ids_.at(r));
  DistanceMatrix out(std::move(ids));
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = a + 1; b < rows.size(); ++b) out.set(a, b, (*this)(rows[a], rows[b]));
  return out;
}

std::string write_distance_csv(const DistanceMatrix& m) {
  std::string out = "id";
  for (const auto& id : m.ids()) out += ',' + id;
  out += '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += m.ids()[i];
    for (std::size_t j = 0; j < m.size(); ++j) {
      out += ',';
      out += text::format_double(m(i, j), 12);
    }
    out += '\n';
  }
  return out;
}

DistanceMatrix read_distance_csv(std::string_view content) {
  const auto rows = text::lines(content);
  if (rows.empty()) throw ParseError("empty matrix file");
  const auto header = text::split(rows[0], ',');
  if (header.empty() || text::trim(header[0]) != "id") throw ParseError("matrix header must start with 'id'", 1);
  std::vector<std::string> ids;
  for (std::size_t j = 1; j < header.size(); ++j) ids.emplace_back(text::trim(header[j]));
  const std::size_t n = ids.size();
  if (rows.size() != n + 1) throw ParseError("expected " + std::to_string(n) + " data rows");
  std::vector<double> values(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto fields = text::split(rows[i + 1], ',');
    if (fields.size() != n + 1) throw ParseError("expected " + std::to_string(n + 1) + " fields", i + 2);
    if (text::trim(fields[0]) != ids[i]) throw ParseError("row label does not match column label", i + 2);
    for (std::size_t j = 0; j < n; ++j) {
      const auto v = text::to_double(fields[j + 1]);
      if (!v || !std::isfinite(*v)) throw ParseError("non-numeric entry", i + 2);
      values[i * n + j] = *v;
    }
  }
  DistanceMatrix m(ids);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = values[i * n + j];
      const double b = values[j * n + i];
      if (std::abs(a - b) > 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}))
        throw ParseError("matrix is not symmetric at (" + ids[i] + ", " + ids[j] + ")");
      m.set(i, j, a);
    }
  return m;
}

double ground_cost(const PersistencePair& a, const PersistencePair& b, double q) noexcept {
  const double db = std::abs(a.birth - b.birth);
  const double dd = std::abs(a.death - b.death);
  if (std::isinf(q)) return std::max(db, dd);
  if (q == 1.0) return db + dd;
  if (q == 2.0) return std::hypot(db, dd);
  return std::pow(std::pow(db, q) + std::pow(dd, q), 1.0 / q);
}

double diagonal_cost(const PersistencePair& a, double q) noexcept {
  const double half = (a.death - a.birth) / 2.0;
  if (std::isinf(q)) return half;
  return half * std::pow(2.0, 1.0 / q);
}

std::vector<std::size_t> min_cost_assignment(std::span<const double> cost, std::size_t n) {
  // Shortest augmenting paths with row/column potentials (Jonker-Volgenant style, O(n^3)).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);  // match[col] = row, 1-based, 0 = free
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const std::size_t i0 = match[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = col0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          col1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
  return assignment;
}

namespace {

// Square cost matrix over rows [d1 points | d2 proxies] and columns
// [d2 points | d1 proxies]. Proxies of one diagram are interchangeable, so a
// d1 point may take any d1 proxy column at its diagonal cost.
std::vector<double> matching_costs(const PersistenceDiagram& d1, const PersistenceDiagram& d2,
                                   double q) {
  const std::size_t n = d1.pairs.size(), m = d2.pairs.size(), size = n + m;
  std::vector<double> cost(size * size, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) cost[i * size + j] = ground_cost(d1.pairs[i], d2.pairs[j], q);
    const double diag = diagonal_cost(d1.pairs[i], q);
    for (std::size_t j = m; j < size; ++j) cost[i * size + j] = diag;
  }
  for (std::size_t i = n; i < size; ++i)
    for (std::size_t j = 0; j < m; ++j) cost[i * size + j] = diagonal_cost(d2.pairs[j], q);
  return cost;
}

// Sum of p-th powers in ascending order, so equal multisets of costs give identical totals.
double combine(std::vector<double> costs, double p) {
  std::sort(costs.begin(), costs.end());
  double total = 0.0;
  for (const double c : costs) total += (p == 1.0 ? c : std::pow(c, p));
  return p == 1.0 ? total : std::pow(total, 1.0 / p);
}

bool perfect_matching_within(const std::vector<double>& cost, std::size_t size, double limit) {
  std::vector<std::vector<std::size_t>> adj(size);
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = 0; j < size; ++j)
      if (cost[i * size + j] <= limit) adj[i].push_back(j);
  std::vector<std::ptrdiff_t> owner(size, -1);
  std::vector<char> seen;
  std::function<bool(std::size_t)> augment = [&](std::size_t row) {
    for (const auto col : adj[row]) {
      if (seen[col]) continue;
      seen[col] = 1;
      if (owner[col] < 0 || augment(static_cast<std::size_t>(owner[col]))) {
        owner[col] = static_cast<std::ptrdiff_t>(row);
        return true;
      }
    }
    return false;
  };
  for (std::size_t row = 0; row < size; ++row) {
    seen.assign(size, 0);
    if (!augment(row)) return false;
  }
  return true;
}

}  // namespace

double wasserstein(const PersistenceDiagram& d1, const PersistenceDiagram& d2,
                   const WassersteinParams& params) {
  if (!(params.p >= 1.0) || !(params.q >= 1.0)) throw ParameterError("Wasserstein exponents must be >= 1");
  const std::size_t size = d1.pairs.size() + d2.pairs.size();
  if (size == 0) return 0.0;
  const auto cost = matching_costs(d1, d2, params.q);

  if (std::isinf(params.p)) {
    std::vector<double> candidates(cost.begin(), cost.end());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    std::size_t lo = 0, hi = candidates.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (perfect_matching_within(cost, size, candidates[mid]))
        hi = mid;
      else
        lo = mid + 1;
    }
    return candidates[lo];
  }

  std::vector<double> powered(cost.size());
  for (std::size_t k = 0; k < cost.size(); ++k)
    powered[k] = params.p == 1.0 ? cost[k] : std::pow(cost[k], params.p);
  const auto assignment = min_cost_assignment(powered, size);
  std::vector<double> chosen;
  chosen.reserve(size);
  for (std::size_t i = 0; i < size; ++i) chosen.push_back(cost[i * size + assignment[i]]);
  return combine(std::move(chosen), params.p);
}

DistanceMatrix pairwise_wasserstein(std::span<const PersistenceDiagram> diagrams,
                                    const WassersteinParams& params) {
  if (diagrams.size() < 2) throw ParameterError("need at least two diagrams");
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& d : diagrams) {
    if (!seen.insert(d.source_id).second) throw IdCollisionError("duplicate diagram id '" + d.source_id + "'");
    ids.push_back(d.source_id);
  }
  DistanceMatrix m(std::move(ids));
  for (std::size_t i = 0; i < diagrams.size(); ++i)
    for (std::size_t j = i + 1; j < diagrams.size(); ++j) m.set(i, j, wasserstein(diagrams[i], diagrams[j], params));
  return m;
}

}  // namespace knotph
