// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [work_dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "knotph/analysis.hpp"
#include "knotph/diagram_metrics.hpp"
#include "knotph/error.hpp"
#include "knotph/landscape.hpp"
#include "knotph/persistence.hpp"
#include "knotph/pipeline.hpp"
#include "knotph/random.hpp"
#include "knotph/synthetic.hpp"
#include "knotph/text.hpp"

using namespace knotph;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int criterion, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s [%d] %s: %s\n", ok ? "PASS" : "FAIL", criterion, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

PointCloud cloud_of(std::vector<Point3> pts) {
  PointCloud c;
  c.source_id = "acceptance";
  c.points = std::move(pts);
  return c;
}

PersistenceDiagram dgm(std::vector<std::pair<double, double>> pts) {
  PersistenceDiagram d;
  for (auto [b, e] : pts) d.pairs.push_back({b, e, false, std::nullopt});
  return d;
}

std::vector<std::pair<double, double>> values(const PersistenceDiagram& d) {
  std::vector<std::pair<double, double>> out;
  for (const auto& p : d.pairs) out.emplace_back(p.birth, p.death);
  std::sort(out.begin(), out.end());
  return out;
}

void criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  int mismatches = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SplitMix64 g(seed);
    std::vector<Point3> pts;
    for (std::size_t i = 0; i < 8 + seed % 5; ++i) pts.push_back({g.uniform(), g.uniform(), g.uniform()});
    const auto cloud = cloud_of(std::move(pts));
    if (values(compute_ph1(cloud)) != values(brute_force_ph(cloud))) ++mismatches;
  }
  const double t = seconds_since(start);
  report(1, "oracle equivalence", mismatches == 0 && t < 30.0,
         "100 clouds, " + std::to_string(mismatches) + " mismatches, " + num(t) + " s");
}

void criterion_2() {
  const auto sq = compute_ph1(cloud_of({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}));
  const bool square_ok = sq.pairs.size() == 1 && std::abs(sq.pairs[0].birth - 1.0) <= 1e-9 &&
                         std::abs(sq.pairs[0].death - std::sqrt(2.0)) <= 1e-9;
  const bool tri_ok = compute_ph1(cloud_of({{0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2, 0}})).pairs.empty();

  // Calibrate on 12 points against the brute-force oracle, then check 100 points.
  const auto circle = [](int n) {
    std::vector<Point3> pts;
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * std::numbers::pi * i / n;
      pts.push_back({std::cos(a), std::sin(a), 0.0});
    }
    return cloud_of(std::move(pts));
  };
  const auto small = brute_force_ph(circle(12));
  const bool calib_ok = small.pairs.size() == 1 && std::abs(small.pairs[0].death - std::sqrt(3.0)) <= 1e-12;
  const auto big = compute_ph1(circle(100));
  const double ratio = big.pairs.size() == 1 ? big.pairs[0].death / std::sqrt(3.0) : 0.0;
  const bool circle_ok = big.pairs.size() == 1 && std::abs(ratio - 1.0) <= 0.02;
  report(2, "canonical shapes", square_ok && tri_ok && calib_ok && circle_ok,
         "square " + std::string(square_ok ? "ok" : "wrong") + ", equilateral " + (tri_ok ? "empty" : "nonempty") +
             ", circle death/sqrt(3) = " + num(ratio));
}

void criterion_3() {
  const auto two = diagram_to_landscape(dgm({{0, 2}, {1, 3}}));
  const auto layer = [](std::vector<std::pair<double, double>> v) {
    LandscapeLayer out;
    for (auto [t, x] : v) out.push_back({t, x});
    return out;
  };
  const bool lists_ok = two.layers.size() == 2 &&
                        two.layers[0] == layer({{0, 0}, {1, 1}, {1.5, 0.5}, {2, 1}, {3, 0}}) &&
                        two.layers[1] == layer({{1, 0}, {1.5, 0.5}, {2, 0}});

  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SplitMix64 g(seed);
    PersistenceDiagram d;
    const auto n = 1 + g.below(12);
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < n; ++i) {
      const double b = g.uniform() * 6.0, e = b + 0.05 + g.uniform() * 4.0;
      d.pairs.push_back({b, e, false, std::nullopt});
      lo = std::min(lo, b);
      hi = std::max(hi, e);
    }
    const auto l = diagram_to_landscape(d);
    for (std::size_t i = 0; i < 1000; ++i) {
      const double t = lo - 0.1 + (hi - lo + 0.2) * i / 999.0;
      std::vector<double> tents;
      for (const auto& p : d.pairs) tents.push_back(std::max(0.0, std::min(t - p.birth, p.death - t)));
      std::sort(tents.begin(), tents.end(), std::greater<>());
      for (std::size_t k = 1; k <= n + 1; ++k)
        worst = std::max(worst, std::abs(landscape_eval(l, k, t) - (k <= n ? tents[k - 1] : 0.0)));
    }
  }
  const double norm = landscape_lp_norm(diagram_to_landscape(dgm({{0, 2}})), 1);
  report(3, "landscape correctness", lists_ok && worst <= 1e-12 && norm == 1.0,
         std::string("critical points ") + (lists_ok ? "exact" : "wrong") + ", max grid error " + num(worst) +
             ", ||tent(0,2)||_1 = " + num(norm));
}

// Exhaustive partial matchings summed in ascending order, like the solver.
double brute_force_w1(const PersistenceDiagram& a, const PersistenceDiagram& b) {
  const std::size_t n = a.pairs.size(), m = b.pairs.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> to(n, -1);
  std::vector<char> used(m, 0);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == n) {
      std::vector<double> costs;
      for (std::size_t k = 0; k < n; ++k)
        costs.push_back(to[k] < 0 ? diagonal_cost(a.pairs[k], INFINITY)
                                  : ground_cost(a.pairs[k], b.pairs[to[k]], INFINITY));
      for (std::size_t j = 0; j < m; ++j)
        if (!used[j]) costs.push_back(diagonal_cost(b.pairs[j], INFINITY));
      costs.resize(n + m, 0.0);
      std::sort(costs.begin(), costs.end());
      double total = 0.0;
      for (double c : costs) total += c;
      best = std::min(best, total);
      return;
    }
    to[i] = -1;
    rec(i + 1);
    for (std::size_t j = 0; j < m; ++j) {
      if (used[j]) continue;
      used[j] = 1;
      to[i] = static_cast<int>(j);
      rec(i + 1);
      used[j] = 0;
      to[i] = -1;
    }
  };
  rec(0);
  return best;
}

PersistenceDiagram random_diagram(SplitMix64& g, std::size_t max_points) {
  PersistenceDiagram d;
  const auto n = g.below(max_points + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double b = g.uniform() * 5.0;
    d.pairs.push_back({b, b + 0.01 + g.uniform() * 3.0, false, std::nullopt});
  }
  return d;
}

void criterion_4() {
  SplitMix64 g(11);
  std::vector<PersistenceDiagram> ds;
  for (int i = 0; i < 50; ++i) ds.push_back(random_diagram(g, 4));
  int mismatches = 0;
  for (std::size_t i = 0; i < ds.size(); ++i)
    for (std::size_t j = 0; j < ds.size(); ++j)
      if (wasserstein(ds[i], ds[j]) != brute_force_w1(ds[i], ds[j])) ++mismatches;

  int violations = 0;
  SplitMix64 h(5);
  for (int t = 0; t < 200; ++t) {
    const auto a = random_diagram(h, 10), b = random_diagram(h, 10), c = random_diagram(h, 10);
    const double ab = wasserstein(a, b), ba = wasserstein(b, a), bc = wasserstein(b, c), ac = wasserstein(a, c);
    const bool ok = ab >= 0.0 && std::abs(ab - ba) <= 1e-9 && ac <= ab + bc + 1e-9 &&
                    std::abs(wasserstein(a, a)) <= 1e-9 && (a.pairs.empty() && b.pairs.empty() ? true : ab > 0.0);
    if (!ok) ++violations;
  }
  const double unit = wasserstein(dgm({{0, 2}}), dgm({}));
  report(4, "Wasserstein correctness", mismatches == 0 && violations == 0 && unit == 1.0,
         "2500 pairs, " + std::to_string(mismatches) + " brute-force mismatches, " + std::to_string(violations) +
             " axiom violations on 200 triples, W({(0,2)}, {}) = " + num(unit));
}

void criterion_5() {
  SplitMix64 g(9);
  LandscapeSample a{"a", {}};
  for (int i = 0; i < 7; ++i) a.landscapes.push_back(diagram_to_landscape(random_diagram(g, 4)));
  const double same = randomization_test(a, a, 1000, 3).p_value;

  const auto tent = [](double d) { return diagram_to_landscape(dgm({{0, d}})); };
  LandscapeSample small{"small", std::vector<Landscape>(10, tent(2))};
  LandscapeSample big{"big", std::vector<Landscape>(10, tent(10))};
  const auto sep = randomization_test(small, big, 1000, 0);
  const auto sep2 = randomization_test(small, big, 1000, 0);

  LandscapeSample b{"b", {}};
  for (int i = 0; i < 5; ++i) b.landscapes.push_back(diagram_to_landscape(random_diagram(g, 4)));
  const auto r1 = randomization_test(a, b, 500, 17), r2 = randomization_test(a, b, 500, 17);
  const bool det = r1.p_value == r2.p_value && r1.t_obs == r2.t_obs && sep.p_value == sep2.p_value;
  report(5, "randomization test", same == 1.0 && sep.p_value == 0.0 && det,
         "identical p = " + num(same) + ", separated p = " + num(sep.p_value) + " at k = 1000, " +
             (det ? "deterministic" : "not deterministic"));
}

struct PipelineRun {
  RunManifest manifest;
  CompareResult compare;
  double compare_seconds = 0.0;
  std::vector<std::pair<std::string, GeneratorResult>> generators;
  std::vector<NoiseRow> noise;
  StageReport report;
};

PipelineConfig acceptance_config(const fs::path& input, const fs::path& out) {
  PipelineConfig c;
  c.input_dir = input;
  c.annotation_path = input / "annotations.tsv";
  c.output_dir = out;
  c.n_neighbors = 20;
  return c;
}

PipelineRun run_pipeline(const PipelineConfig& c) {
  PipelineRun r;
  fs::remove_all(c.output_dir);
  const auto start = std::chrono::steady_clock::now();
  r.manifest = cmd_ingest(c, r.report);
  cmd_ph(r.manifest, c, r.report);
  r.compare = cmd_compare(r.manifest, c, "landscape", r.report);
  r.compare_seconds = seconds_since(start);
  for (const auto& s : r.manifest.structures) {
    if (s.depth_label() != "deep") continue;
    try {
      r.generators.emplace_back(s.id, cmd_generator(r.manifest, c, s.id, 2, std::nullopt, r.report));
    } catch (const NoSuchLayerError&) {
      r.generators.emplace_back(s.id, cmd_generator(r.manifest, c, s.id, 1, std::nullopt, r.report));
    }
  }
  r.noise = cmd_noise(r.manifest, c, r.report);
  return r;
}

void criterion_6(const PipelineRun& run) {
  const auto& cmp = run.compare;
  if (!cmp.embedding || !cmp.silhouette_depth) {
    report(6, "synthetic depth separation", false, "no embedding or silhouette was produced");
    return;
  }
  ClusterLabels labels;
  for (const auto& s : run.manifest.structures) {
    labels.ids.push_back(s.id);
    labels.labels.push_back(s.depth_label());
  }
  const double observed = silhouette(*cmp.embedding, labels);
  SplitMix64 g(2024);
  int beaten = 0;
  for (int draw = 0; draw < 100; ++draw) {
    ClusterLabels shuffled = labels;
    for (std::size_t i = shuffled.labels.size() - 1; i > 0; --i)
      std::swap(shuffled.labels[i], shuffled.labels[g.below(i + 1)]);
    if (observed > silhouette(*cmp.embedding, shuffled)) ++beaten;
  }
  const bool ok = observed == *cmp.silhouette_depth && observed > 0.15 && beaten >= 99 &&
                  run.compare_seconds < 600.0;
  report(6, "synthetic depth separation", ok,
         "silhouette " + num(observed) + ", beats " + std::to_string(beaten) + "/100 permutations, " +
             num(run.compare_seconds) + " s for ingest, ph and compare");
}

void criterion_7(const PipelineRun& run, const PipelineConfig& c) {
  double overlap = 0.0, baseline = 0.0;
  std::size_t n = 0, fallbacks = 0;
  for (const auto& [id, g] : run.generators) {
    const auto& rec = *std::find_if(run.manifest.structures.begin(), run.manifest.structures.end(),
                                    [&](const StructureRecord& s) { return s.id == id; });
    if (!g.core_overlap || !rec.annotation) continue;
    if (g.k == 1) ++fallbacks;
    PointCloud cloud;
    cloud.source_id = id;
    cloud.points = parse_xyz(text::read_file(c.output_dir / rec.cloud)).points;
    cloud.interp_factor = c.interp_factor;
    // Exact mean over every window of core length.
    const std::size_t width = rec.annotation->core_end - rec.annotation->core_start + 1;
    double sum = 0.0;
    for (std::size_t s = 0; s + width <= rec.length; ++s)
      sum += cycle_core_overlap(g.cycle, cloud, KnotAnnotation::from_core(rec.length, s, s + width - 1));
    baseline += sum / static_cast<double>(rec.length - width + 1);
    overlap += *g.core_overlap;
    ++n;
  }
  if (n == 0) {
    report(7, "generator localization", false, "no deep structures with generators");
    return;
  }
  overlap /= static_cast<double>(n);
  baseline /= static_cast<double>(n);
  report(7, "generator localization", n == 20 && overlap >= 0.5 && baseline <= 0.25,
         std::to_string(n) + " deep structures (" + std::to_string(fallbacks) + " at k = 1), mean overlap " +
             num(overlap) + ", random-window baseline " + num(baseline));
}

void criterion_8(const PipelineRun& run) {
  const auto& rows = run.noise;
  const double base = run.compare.silhouette_depth.value_or(std::numeric_limits<double>::quiet_NaN());
  bool complete = rows.size() == 10;
  for (const auto& r : rows) complete = complete && r.silhouette_depth.has_value();
  std::size_t noise_failures = 0;
  for (const auto& f : run.report.failures)
    if (f.stage.rfind("noise", 0) == 0) ++noise_failures;
  if (!complete || noise_failures > 0) {
    report(8, "noise robustness", false,
           std::to_string(rows.size()) + " rows, " + std::to_string(noise_failures) + " failures");
    return;
  }
  const double s01 = *rows.front().silhouette_depth, s10 = *rows.back().silhouette_depth;
  std::string curve;
  for (const auto& r : rows) curve += (curve.empty() ? "" : " ") + num(*r.silhouette_depth);
  report(8, "noise robustness", std::abs(s01 - base) <= 0.1 && s10 < base,
         "sigma 0: " + num(base) + ", 0.1: " + num(s01) + ", 1.0: " + num(s10) + " [" + curve + "]");
}

std::vector<fs::path> files_under(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
  std::sort(out.begin(), out.end());
  return out;
}

void criterion_9(const fs::path& a, const fs::path& b) {
  const auto fa = files_under(a), fb = files_under(b);
  std::size_t differing = 0;
  if (fa == fb)
    for (const auto& f : fa)
      if (text::read_file(a / f) != text::read_file(b / f)) ++differing;
  report(9, "determinism", fa == fb && differing == 0,
         std::to_string(fa.size()) + " files, " + (fa == fb ? "same file set" : "different file sets") + ", " +
             std::to_string(differing) + " differ");
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "knotph_acceptance";
  try {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();

    fs::remove_all(work);
    write_dataset(work / "input", trefoil_dataset(20, 20, 0));
    const auto config_a = acceptance_config(work / "input", work / "run_a");
    const auto config_b = acceptance_config(work / "input", work / "run_b");
    const auto run_a = run_pipeline(config_a);
    criterion_6(run_a);
    criterion_7(run_a, config_a);
    criterion_8(run_a);
    run_pipeline(config_b);
    criterion_9(config_a.output_dir, config_b.output_dir);
  } catch (const std::exception& e) {
    std::printf("FAIL aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
