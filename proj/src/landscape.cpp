#include "knotph/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "knotph/error.hpp"
#include "knotph/random.hpp"
#include "knotph/text.hpp"

namespace knotph {
namespace {

int integer_exponent(double p) {
  if (!(p >= 1.0) || std::isinf(p) || p != std::floor(p) || p > 64.0)
    throw UnsupportedParameterError("landscape norms need an integer p >= 1, got " + text::format_double(p));
  return static_cast<int>(p);
}

double ipow(double x, int p) noexcept {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

// Integral of |f|^p over one linear piece from value a to value b across width h.
double piece_integral(double h, double a, double b, int p) noexcept {
  if ((a >= 0.0 && b >= 0.0) || (a <= 0.0 && b <= 0.0)) {
    const double x = std::abs(a), y = std::abs(b);
    double s = 0.0;
    for (int j = 0; j <= p; ++j) s += ipow(x, j) * ipow(y, p - j);
    return h * s / (p + 1);
  }
  const double left = h * (a / (a - b));
  const double right = h - left;
  return (left * ipow(std::abs(a), p) + right * ipow(std::abs(b), p)) / (p + 1);
}

double layer_integral(const LandscapeLayer& layer, int p) noexcept {
  double s = 0.0;
  for (std::size_t i = 1; i < layer.size(); ++i)
    s += piece_integral(layer[i].t - layer[i - 1].t, layer[i - 1].value, layer[i].value, p);
  return s;
}

double layer_eval(const LandscapeLayer& layer, double t) noexcept {
  if (layer.empty() || t < layer.front().t || t > layer.back().t) return 0.0;
  const auto it = std::lower_bound(layer.begin(), layer.end(), t,
                                   [](const CriticalPoint& c, double x) { return c.t < x; });
  if (it->t == t) return it->value;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  return lo.value + (hi.value - lo.value) * (t - lo.t) / (hi.t - lo.t);
}

std::vector<double> merged_grid(const LandscapeLayer& a, const LandscapeLayer& b) {
  std::vector<double> ts;
  ts.reserve(a.size() + b.size());
  for (const auto& c : a) ts.push_back(c.t);
  for (const auto& c : b) ts.push_back(c.t);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

LandscapeLayer layer_difference(const LandscapeLayer& a, const LandscapeLayer& b) {
  LandscapeLayer out;
  for (const double t : merged_grid(a, b)) out.push_back({t, layer_eval(a, t) - layer_eval(b, t)});
  return out;
}

const LandscapeLayer& layer_or_empty(const Landscape& l, std::size_t index) {
  static const LandscapeLayer empty;
  return index < l.layers.size() ? l.layers[index] : empty;
}

}  // namespace

double tent(const PersistencePair& pair, double t) noexcept {
  if (t < pair.birth || t > pair.death) return 0.0;
  return std::min(t - pair.birth, pair.death - t);
}

Landscape diagram_to_landscape(const PersistenceDiagram& diagram) {
  struct Bar {
    double b, d;
  };
  std::vector<Bar> queue;
  for (const auto& p : diagram.pairs)
    if (p.death > p.birth) queue.push_back({p.birth, p.death});
  const auto before = [](const Bar& x, const Bar& y) { return x.b != y.b ? x.b < y.b : x.d > y.d; };
  std::stable_sort(queue.begin(), queue.end(), before);

  Landscape out;
  while (!queue.empty()) {
    LandscapeLayer layer;
    Bar cur = queue.front();
    queue.erase(queue.begin());
    std::size_t pos = 0;
    layer.push_back({cur.b, 0.0});
    layer.push_back({(cur.b + cur.d) / 2, (cur.d - cur.b) / 2});
    for (;;) {
      std::size_t next = pos;
      while (next < queue.size() && queue[next].d <= cur.d) ++next;
      if (next == queue.size()) {
        layer.push_back({cur.d, 0.0});
        break;
      }
      const Bar nb = queue[next];
      queue.erase(queue.begin() + static_cast<std::ptrdiff_t>(next));
      pos = next;
      if (nb.b > cur.d) layer.push_back({cur.d, 0.0});
      if (nb.b >= cur.d) {
        layer.push_back({nb.b, 0.0});
      } else {
        layer.push_back({(nb.b + cur.d) / 2, (cur.d - nb.b) / 2});
        const Bar rest{nb.b, cur.d};
        const auto at = std::upper_bound(queue.begin() + static_cast<std::ptrdiff_t>(pos), queue.end(), rest, before);
        queue.insert(at, rest);
      }
      layer.push_back({(nb.b + nb.d) / 2, (nb.d - nb.b) / 2});
      cur = nb;
    }
    LandscapeLayer clean;
    for (const auto& c : layer)
      if (clean.empty() || c.t > clean.back().t) clean.push_back(c);
    out.layers.push_back(std::move(clean));
  }
  return out;
}

double landscape_eval(const Landscape& l, std::size_t k, double t) {
  if (k == 0) throw ParameterError("landscape layers are numbered from 1");
  return k <= l.layers.size() ? layer_eval(l.layers[k - 1], t) : 0.0;
}

double landscape_lp_norm(const Landscape& l, double p) {
  const int e = integer_exponent(p);
  double total = 0.0;
  for (const auto& layer : l.layers) total += layer_integral(layer, e);
  return e == 1 ? total : std::pow(total, 1.0 / e);
}

double landscape_distance(const Landscape& l1, const Landscape& l2, double p) {
  const int e = integer_exponent(p);
  const std::size_t depth = std::max(l1.layers.size(), l2.layers.size());
  double total = 0.0;
  for (std::size_t k = 0; k < depth; ++k)
    total += layer_integral(layer_difference(layer_or_empty(l1, k), layer_or_empty(l2, k)), e);
  return e == 1 ? total : std::pow(total, 1.0 / e);
}

double layer_restricted_distance(const Landscape& l1, const Landscape& l2, const std::set<int>& layers) {
  if (layers.empty()) throw ParameterError("layer set must be nonempty");
  double total = 0.0;
  for (const int k : layers) {
    if (k < 1) throw ParameterError("layer indices start at 1");
    const auto idx = static_cast<std::size_t>(k - 1);
    total += layer_integral(layer_difference(layer_or_empty(l1, idx), layer_or_empty(l2, idx)), 1);
  }
  return total;
}

Landscape average_landscape(const LandscapeSample& sample) {
  if (sample.landscapes.empty()) throw ParameterError("cannot average an empty sample");
  std::size_t depth = 0;
  for (const auto& l : sample.landscapes) depth = std::max(depth, l.layers.size());
  const double n = static_cast<double>(sample.landscapes.size());
  Landscape out;
  for (std::size_t k = 0; k < depth; ++k) {
    std::vector<double> ts;
    for (const auto& l : sample.landscapes)
      for (const auto& c : layer_or_empty(l, k)) ts.push_back(c.t);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    LandscapeLayer layer;
    layer.reserve(ts.size());
    for (const double t : ts) {
      double s = 0.0;
      for (const auto& l : sample.landscapes) s += layer_eval(layer_or_empty(l, k), t);
      layer.push_back({t, s / n});
    }
    out.layers.push_back(std::move(layer));
  }
  return out;
}

RandomizationResult randomization_test(const LandscapeSample& a, const LandscapeSample& b, std::size_t k,
                                       std::uint64_t seed, double norm_p) {
  if (k == 0) throw ParameterError("randomization test needs k >= 1");
  if (a.landscapes.empty() || b.landscapes.empty()) throw ParameterError("both samples must be nonempty");
  const int e = integer_exponent(norm_p);

  RandomizationResult result;
  result.t_obs = landscape_distance(average_landscape(a), average_landscape(b), norm_p);
  result.draws = k;
  result.seed = seed;

  std::vector<const Landscape*> pooled;
  for (const auto& l : a.landscapes) pooled.push_back(&l);
  for (const auto& l : b.landscapes) pooled.push_back(&l);
  const std::size_t total = pooled.size(), n_a = a.landscapes.size();
  std::size_t depth = 0;
  for (const auto* l : pooled) depth = std::max(depth, l->layers.size());

  // Every member is linear between consecutive points of the pooled grid, so
  // each split's averages and their difference are exact on that grid.
  std::vector<std::vector<double>> grids(depth);
  std::vector<std::vector<std::vector<double>>> samples(depth);
  for (std::size_t layer = 0; layer < depth; ++layer) {
    auto& ts = grids[layer];
    for (const auto* l : pooled)
      for (const auto& c : layer_or_empty(*l, layer)) ts.push_back(c.t);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    for (const auto* l : pooled) {
      std::vector<double> row;
      row.reserve(ts.size());
      for (const double t : ts) row.push_back(layer_eval(layer_or_empty(*l, layer), t));
      samples[layer].push_back(std::move(row));
    }
  }

  std::vector<char> in_first(total, 0);
  std::vector<double> sum_a, sum_b;
  const auto statistic = [&] {
    double acc = 0.0;
    for (std::size_t layer = 0; layer < depth; ++layer) {
      const auto& ts = grids[layer];
      sum_a.assign(ts.size(), 0.0);
      sum_b.assign(ts.size(), 0.0);
      for (std::size_t i = 0; i < total; ++i) {
        auto& dst = in_first[i] ? sum_a : sum_b;
        const auto& row = samples[layer][i];
        for (std::size_t g = 0; g < ts.size(); ++g) dst[g] += row[g];
      }
      const double na = static_cast<double>(n_a), nb = static_cast<double>(total - n_a);
      for (std::size_t g = 1; g < ts.size(); ++g)
        acc += piece_integral(ts[g] - ts[g - 1], sum_a[g - 1] / na - sum_b[g - 1] / nb, sum_a[g] / na - sum_b[g] / nb, e);
    }
    return e == 1 ? acc : std::pow(acc, 1.0 / e);
  };

  std::fill(in_first.begin(), in_first.begin() + static_cast<std::ptrdiff_t>(n_a), 1);
  const double observed = statistic();

  std::size_t hits = 0;
  std::vector<std::size_t> order(total);
  for (std::size_t draw = 0; draw < k; ++draw) {
    SplitMix64 gen(derive_seed(seed, draw));
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = total - 1; i > 0; --i) std::swap(order[i], order[gen.below(i + 1)]);
    std::fill(in_first.begin(), in_first.end(), 0);
    for (std::size_t i = 0; i < n_a; ++i) in_first[order[i]] = 1;
    if (statistic() >= observed) ++hits;
  }
  result.p_value = static_cast<double>(hits) / static_cast<double>(k);
  return result;
}

LayerPeak find_layer_peak(const Landscape& l, std::size_t k, std::optional<double> near) {
  if (k == 0 || k > l.layers.size() || l.layers[k - 1].empty())
    throw NoSuchLayerError("landscape has " + std::to_string(l.layers.size()) + " layers, lambda_" +
                           std::to_string(k) + " requested");
  const auto& layer = l.layers[k - 1];
  if (!near) {
    LayerPeak best{layer.front().t, layer.front().value};
    for (const auto& c : layer)
      if (c.value > best.height) best = {c.t, c.value};
    return best;
  }
  std::optional<LayerPeak> best;
  for (std::size_t i = 0; i < layer.size(); ++i) {
    const double left = i > 0 ? layer[i - 1].value : 0.0;
    const double right = i + 1 < layer.size() ? layer[i + 1].value : 0.0;
    const double v = layer[i].value;
    if (!(v > 0.0 && v >= left && v >= right)) continue;
    if (!best || std::abs(layer[i].t - *near) < std::abs(best->t - *near)) best = LayerPeak{layer[i].t, v};
  }
  if (!best) throw NoSuchLayerError("lambda_" + std::to_string(k) + " has no local maximum");
  return *best;
}

std::size_t pair_at(const PersistenceDiagram& diagram, std::size_t k, double t) {
  if (k == 0 || k > diagram.pairs.size())
    throw NoSuchLayerError("diagram has " + std::to_string(diagram.pairs.size()) + " pairs, rank " +
                           std::to_string(k) + " requested");
  std::vector<std::size_t> idx(diagram.pairs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    return tent(diagram.pairs[x], t) > tent(diagram.pairs[y], t);
  });
  return idx[k - 1];
}

std::string write_lan(const Landscape& l) {
  std::string out = "#landscape v1\n";
  for (std::size_t k = 0; k < l.layers.size(); ++k) {
    if (l.layers[k].empty()) continue;
    out += "#lambda " + std::to_string(k + 1) + '\n';
    for (const auto& c : l.layers[k]) {
      out += text::format_double(c.t);
      out += ' ';
      out += text::format_double(c.value);
      out += '\n';
    }
  }
  return out;
}

Landscape read_lan(std::string_view content) {
  const auto all = text::lines(content);
  if (all.empty() || all.front() != "#landscape v1") throw ParseError("missing '#landscape v1' header", 1);
  Landscape out;
  LandscapeLayer* current = nullptr;
  for (std::size_t i = 1; i < all.size(); ++i) {
    const auto line = all[i];
    const std::size_t line_no = i + 1;
    if (text::trim(line).empty()) continue;
    if (line.starts_with("#lambda")) {
      const auto k = text::to_int(line.substr(7));
      if (!k || *k < 1 || static_cast<std::size_t>(*k) <= out.layers.size())
        throw ParseError("layer numbers must increase from 1", line_no);
      out.layers.resize(static_cast<std::size_t>(*k));
      current = &out.layers.back();
      continue;
    }
    if (!current) throw ParseError("critical point before any '#lambda' line", line_no);
    const auto fields = text::split_ws(line);
    if (fields.size() != 2) throw ParseError("expected 't value'", line_no);
    const auto t = text::to_double(fields[0]);
    const auto v = text::to_double(fields[1]);
    if (!t || !v || !std::isfinite(*t) || !std::isfinite(*v) || *v < 0.0)
      throw ParseError("invalid critical point", line_no);
    if (!current->empty() && !(*t > current->back().t)) throw ParseError("t does not increase", line_no);
    current->push_back({*t, *v});
  }
  return out;
}

}  // namespace knotph
