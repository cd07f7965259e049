#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "knotph/error.hpp"
#include "knotph/landscape.hpp"
#include "knotph/random.hpp"

using namespace knotph;

namespace {

PersistenceDiagram dgm(std::vector<std::pair<double, double>> pts) {
  PersistenceDiagram d;
  for (auto [b, e] : pts) d.pairs.push_back({b, e, false, std::nullopt});
  return d;
}

Landscape tent_landscape(double b, double d) { return diagram_to_landscape(dgm({{b, d}})); }

// k-th largest tent value straight from the definition.
double kth_tent(const PersistenceDiagram& d, std::size_t k, double t) {
  std::vector<double> v;
  for (const auto& p : d.pairs) v.push_back(tent(p, t));
  std::sort(v.begin(), v.end(), std::greater<>());
  return k <= v.size() ? v[k - 1] : 0.0;
}

PersistenceDiagram random_diagram(SplitMix64& g, std::size_t max_points) {
  PersistenceDiagram d;
  const auto n = 1 + g.below(max_points);
  for (std::size_t i = 0; i < n; ++i) {
    const double b = g.uniform() * 6.0;
    d.pairs.push_back({b, b + 0.05 + g.uniform() * 4.0, false, std::nullopt});
  }
  return d;
}

// Midpoint-rule quadrature of sum_k |l1_k - l2_k|^p over [lo, hi].
double quadrature(const Landscape& l1, const Landscape& l2, double p, double lo, double hi, std::size_t layers) {
  const std::size_t n = 200000;
  const double h = (hi - lo) / n;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = lo + (i + 0.5) * h;
    for (std::size_t k = 1; k <= layers; ++k)
      s += std::pow(std::abs(landscape_eval(l1, k, t) - landscape_eval(l2, k, t)), p) * h;
  }
  return std::pow(s, 1.0 / p);
}

LandscapeLayer pts(std::vector<std::pair<double, double>> v) {
  LandscapeLayer out;
  for (auto [t, x] : v) out.push_back({t, x});
  return out;
}

}  // namespace

TEST_CASE("diagram_to_landscape on small diagrams") {
  CHECK(diagram_to_landscape(PersistenceDiagram{}).layers.empty());

  const auto one = tent_landscape(0, 2);
  REQUIRE(one.layers.size() == 1);
  CHECK(one.layers[0] == pts({{0, 0}, {1, 1}, {2, 0}}));

  const auto two = diagram_to_landscape(dgm({{0, 2}, {1, 3}}));
  REQUIRE(two.layers.size() == 2);
  CHECK(two.layers[0] == pts({{0, 0}, {1, 1}, {1.5, 0.5}, {2, 1}, {3, 0}}));
  CHECK(two.layers[1] == pts({{1, 0}, {1.5, 0.5}, {2, 0}}));

  const auto r = tent_landscape(1, std::sqrt(2.0));
  const auto peak = find_layer_peak(r, 1);
  CHECK(peak.t == doctest::Approx((1 + std::sqrt(2.0)) / 2).epsilon(1e-15));
  CHECK(peak.height == doctest::Approx(0.20711).epsilon(1e-5));

  // Zero-persistence pairs vanish; disjoint and nested tents.
  CHECK(diagram_to_landscape(dgm({{1, 1}})).layers.empty());
  const auto disjoint = diagram_to_landscape(dgm({{0, 1}, {2, 4}}));
  REQUIRE(disjoint.layers.size() == 1);
  CHECK(disjoint.layers[0] == pts({{0, 0}, {0.5, 0.5}, {1, 0}, {2, 0}, {3, 1}, {4, 0}}));
  const auto nested = diagram_to_landscape(dgm({{0, 10}, {2, 4}}));
  REQUIRE(nested.layers.size() == 2);
  CHECK(nested.layers[1] == pts({{2, 0}, {3, 1}, {4, 0}}));
}

TEST_CASE("landscape agrees with the k-th largest tent on random diagrams") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SplitMix64 g(seed);
    const auto d = random_diagram(g, 12);
    const auto l = diagram_to_landscape(d);
    double lo = 1e300, hi = -1e300;
    for (const auto& p : d.pairs) lo = std::min(lo, p.birth), hi = std::max(hi, p.death);
    for (std::size_t i = 0; i < 1000; ++i) {
      const double t = lo - 0.1 + (hi - lo + 0.2) * i / 999.0;
      for (std::size_t k = 1; k <= d.pairs.size() + 1; ++k)
        REQUIRE(std::abs(landscape_eval(l, k, t) - kth_tent(d, k, t)) <= 1e-12);
    }
    for (std::size_t k = 0; k < l.layers.size(); ++k) {
      const auto& layer = l.layers[k];
      for (std::size_t i = 1; i < layer.size(); ++i) {
        REQUIRE(layer[i].t > layer[i - 1].t);
        const double slope = (layer[i].value - layer[i - 1].value) / (layer[i].t - layer[i - 1].t);
        CHECK(std::abs(slope) <= 1.0 + 1e-9);
      }
      if (k > 0)
        for (const auto& c : layer) CHECK(landscape_eval(l, k, c.t) >= c.value - 1e-12);
    }
  }
}

TEST_CASE("landscape_eval") {
  const auto l = tent_landscape(0, 2);
  CHECK(landscape_eval(l, 1, 0.5) == 0.5);
  CHECK(landscape_eval(l, 2, 1.0) == 0.0);
  CHECK(landscape_eval(l, 1, -5.0) == 0.0);
  CHECK_THROWS_AS(landscape_eval(l, 0, 1.0), ParameterError);
}

TEST_CASE("norms in closed form") {
  const auto l = tent_landscape(0, 2);
  CHECK(landscape_lp_norm(l, 1) == 1.0);
  CHECK(landscape_lp_norm(l, 2) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-14));
  CHECK(landscape_lp_norm(l, 2) == doctest::Approx(quadrature(l, Landscape{}, 2, 0, 2, 1)).epsilon(1e-8));
  CHECK(landscape_lp_norm(Landscape{}, 1) == 0.0);
  CHECK(landscape_lp_norm(Landscape{}, 3) == 0.0);
  CHECK_THROWS_AS(landscape_lp_norm(l, 1.5), UnsupportedParameterError);
  CHECK_THROWS_AS(landscape_distance(l, l, 0.5), UnsupportedParameterError);
}

TEST_CASE("distances") {
  const auto a = tent_landscape(0, 2), b = tent_landscape(0, 4);
  CHECK(landscape_distance(a, a, 1) == 0.0);
  CHECK(landscape_distance(a, Landscape{}, 1) == 1.0);
  CHECK(landscape_distance(a, b, 1) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(landscape_distance(a, b, 1) == doctest::Approx(quadrature(a, b, 1, 0, 4, 1)).epsilon(1e-8));

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SplitMix64 g(seed + 100);
    const auto l1 = diagram_to_landscape(random_diagram(g, 6));
    const auto l2 = diagram_to_landscape(random_diagram(g, 6));
    for (int p : {1, 2, 3}) {
      CHECK(landscape_distance(l1, Landscape{}, p) == landscape_lp_norm(l1, p));
      CHECK(landscape_distance(l1, l2, p) == doctest::Approx(landscape_distance(l2, l1, p)).epsilon(1e-14));
    }
    const std::size_t layers = std::max(l1.layers.size(), l2.layers.size());
    CHECK(landscape_distance(l1, l2, 2) ==
          doctest::Approx(quadrature(l1, l2, 2, -0.5, 11, layers)).epsilon(1e-5));
  }
}

TEST_CASE("layer_restricted_distance") {
  const auto d1 = diagram_to_landscape(dgm({{0, 4}, {1, 2}}));
  const auto d2 = diagram_to_landscape(dgm({{0, 4}, {1, 3}}));
  CHECK(layer_restricted_distance(d1, d2, {1}) == 0.0);
  CHECK(layer_restricted_distance(d1, d2, {2}) > 0.0);
  CHECK(layer_restricted_distance(tent_landscape(0, 2), Landscape{}, {2}) == 0.0);
  CHECK(layer_restricted_distance(d1, d2, {1, 2}) ==
        layer_restricted_distance(d1, d2, {1}) + layer_restricted_distance(d1, d2, {2}));
  CHECK(layer_restricted_distance(d1, d2, {1, 2}) == landscape_distance(d1, d2, 1));
  CHECK_THROWS_AS(layer_restricted_distance(d1, d2, {}), ParameterError);
}

TEST_CASE("average_landscape") {
  const auto l = diagram_to_landscape(dgm({{0, 2}, {1, 3}}));
  CHECK(average_landscape({"x", {l, l, l}}) == l);
  const auto half = average_landscape({"x", {tent_landscape(0, 2), Landscape{}}});
  REQUIRE(half.layers.size() == 1);
  CHECK(half.layers[0] == pts({{0, 0}, {1, 0.5}, {2, 0}}));
  CHECK_THROWS_AS(average_landscape({"x", {}}), ParameterError);

  SplitMix64 g(5);
  LandscapeSample s{"r", {}};
  for (int i = 0; i < 6; ++i) s.landscapes.push_back(diagram_to_landscape(random_diagram(g, 5)));
  const auto avg = average_landscape(s);
  for (int i = 0; i <= 2000; ++i) {
    const double t = -0.5 + 11.0 * i / 2000.0;
    for (std::size_t k = 1; k <= avg.layers.size(); ++k) {
      double mean = 0.0;
      for (const auto& m : s.landscapes) mean += landscape_eval(m, k, t);
      mean /= s.landscapes.size();
      REQUIRE(std::abs(landscape_eval(avg, k, t) - mean) <= 1e-12);
      if (k > 1) CHECK(landscape_eval(avg, k, t) <= landscape_eval(avg, k - 1, t) + 1e-12);
    }
  }
}

TEST_CASE("randomization_test") {
  SplitMix64 g(9);
  LandscapeSample a{"a", {}};
  for (int i = 0; i < 7; ++i) a.landscapes.push_back(diagram_to_landscape(random_diagram(g, 4)));
  const auto same = randomization_test(a, a, 200, 3);
  CHECK(same.t_obs == 0.0);
  CHECK(same.p_value == 1.0);

  LandscapeSample small{"s", std::vector<Landscape>(10, tent_landscape(0, 2))};
  LandscapeSample big{"b", std::vector<Landscape>(10, tent_landscape(0, 10))};
  const auto sep = randomization_test(small, big, 1000, 42);
  CHECK(sep.p_value == 0.0);
  CHECK(sep.t_obs == doctest::Approx(24.0).epsilon(1e-14));

  LandscapeSample b{"b", {}};
  for (int i = 0; i < 5; ++i) b.landscapes.push_back(diagram_to_landscape(random_diagram(g, 4)));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const double p1 = randomization_test(a, b, 1, seed).p_value;
    CHECK((p1 == 0.0 || p1 == 1.0));
  }
  const auto r1 = randomization_test(a, b, 137, 11);
  const auto r2 = randomization_test(a, b, 137, 11);
  CHECK(r1.p_value == r2.p_value);
  const double scaled = r1.p_value * 137;
  CHECK(scaled == std::round(scaled));
  CHECK(r1.t_obs == landscape_distance(average_landscape(a), average_landscape(b), 1));

  // Oracle: direct recomputation of every draw through the public operations.
  const auto r3 = randomization_test(a, b, 40, 77, 2);
  std::vector<Landscape> pooled = a.landscapes;
  pooled.insert(pooled.end(), b.landscapes.begin(), b.landscapes.end());
  std::size_t hits = 0;
  for (std::size_t draw = 0; draw < 40; ++draw) {
    SplitMix64 gen(derive_seed(77, draw));
    std::vector<std::size_t> order(pooled.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[gen.below(i + 1)]);
    LandscapeSample x{"x", {}}, y{"y", {}};
    for (std::size_t i = 0; i < order.size(); ++i)
      (i < a.landscapes.size() ? x : y).landscapes.push_back(pooled[order[i]]);
    const double stat = landscape_distance(average_landscape(x), average_landscape(y), 2);
    if (stat >= r3.t_obs * (1 - 1e-12)) ++hits;
  }
  CHECK(r3.p_value == static_cast<double>(hits) / 40);

  CHECK_THROWS_AS(randomization_test(a, b, 0, 1), ParameterError);
  CHECK_THROWS_AS(randomization_test(a, LandscapeSample{"e", {}}, 10, 1), ParameterError);
}

TEST_CASE("peaks and pairs") {
  const auto d = dgm({{0, 2}, {1, 3}, {0.5, 6}});
  const auto l = diagram_to_landscape(d);
  for (std::size_t k = 1; k <= l.layers.size(); ++k) {
    const auto peak = find_layer_peak(l, k);
    const auto idx = pair_at(d, k, peak.t);
    CHECK(std::abs(tent(d.pairs[idx], peak.t) - peak.height) <= 1e-12);
  }
  CHECK_THROWS_AS(find_layer_peak(l, 7), NoSuchLayerError);
  CHECK_THROWS_AS(pair_at(d, 4, 1.0), NoSuchLayerError);

  const auto twin = diagram_to_landscape(dgm({{0, 2}, {4, 10}}));
  CHECK(find_layer_peak(twin, 1).t == 7.0);
  CHECK(find_layer_peak(twin, 1, 1.2).t == 1.0);

  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SplitMix64 g(seed + 500);
    const auto rd = random_diagram(g, 10);
    const auto rl = diagram_to_landscape(rd);
    for (std::size_t k = 1; k <= rl.layers.size(); ++k) {
      const auto peak = find_layer_peak(rl, k);
      CHECK(std::abs(tent(rd.pairs[pair_at(rd, k, peak.t)], peak.t) - peak.height) <= 1e-12);
    }
  }
}

TEST_CASE(".lan format") {
  CHECK(write_lan(tent_landscape(0, 2)) == "#landscape v1\n#lambda 1\n0 0\n1 1\n2 0\n");
  CHECK(write_lan(Landscape{}) == "#landscape v1\n");
  CHECK(read_lan("#landscape v1\n") == Landscape{});

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SplitMix64 g(seed + 1000);
    Landscape l = diagram_to_landscape(random_diagram(g, 8));
    if (seed % 2) {
      LandscapeSample s{"s", {l, diagram_to_landscape(random_diagram(g, 8))}};
      l = average_landscape(s);
    }
    REQUIRE(read_lan(write_lan(l)) == l);
  }

  const auto gap = read_lan("#landscape v1\n#lambda 2\n0 0\n1 1\n");
  REQUIRE(gap.layers.size() == 2);
  CHECK(gap.layers[0].empty());

  auto line_of = [](const std::string& s) {
    try {
      read_lan(s);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line_of("#landscape v2\n") == 1);
  CHECK(line_of("#landscape v1\n#lambda 1\n0 0\n1 1\n1 0\n") == 5);
  CHECK(line_of("#landscape v1\n0 0\n") == 2);
  CHECK(line_of("#landscape v1\n#lambda 1\n0 x\n") == 3);
  CHECK(line_of("#landscape v1\n#lambda 2\n0 0\n#lambda 1\n") == 4);
}
