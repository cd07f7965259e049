#include "knotph/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "knotph/error.hpp"
#include "knotph/random.hpp"
#include "knotph/text.hpp"

namespace knotph {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCut = kPi / 3;  // outermost point of a lobe
constexpr std::size_t kSteps = 20000;

Point3 trefoil(double s) {
  return {std::sin(s) + 2 * std::sin(2 * s), std::cos(s) - 2 * std::cos(2 * s), -std::sin(3 * s)};
}

Point3 unit(const Point3& p) {
  const double n = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
  return p * (1.0 / n);
}

}  // namespace

BackboneChain open_trefoil(std::string id, const TrefoilShape& shape, std::uint64_t seed) {
  if (shape.core < 8) throw ParameterError("a trefoil core needs at least 8 residues");
  if (!(shape.spacing > 0.0) || !(shape.jitter >= 0.0)) throw ParameterError("invalid trefoil spacing or jitter");

  // Leave a gap of about one spacing at the cut so the ends do not touch.
  std::vector<Point3> knot;
  std::vector<double> arc{0.0};
  const double gap = 2 * kPi / static_cast<double>(shape.core);
  for (std::size_t i = 0; i <= kSteps; ++i) {
    const double s = kCut + gap / 2 + (2 * kPi - gap) * static_cast<double>(i) / kSteps;
    knot.push_back(trefoil(s));
    if (i) arc.push_back(arc.back() + euclidean(knot[i - 1], knot[i]));
  }
  const double scale = static_cast<double>(shape.core - 1) * shape.spacing / arc.back();
  for (auto& p : knot) p = p * scale;
  for (auto& a : arc) a *= scale;

  const Point3 lift{0.0, 0.0, 0.3};
  const Point3 out_n = unit(knot[0] - knot[1] + lift);
  const Point3 out_c = unit(knot[kSteps] - knot[kSteps - 1] - lift);

  BackboneChain chain;
  chain.id = std::move(id);
  const std::size_t length = shape.n_tail + shape.core + shape.c_tail;
  std::size_t seg = 1;
  for (std::size_t i = 0; i < length; ++i) {
    Point3 p;
    if (i < shape.n_tail) {
      p = knot[0] + out_n * (static_cast<double>(shape.n_tail - i) * shape.spacing);
    } else if (i >= shape.n_tail + shape.core) {
      p = knot[kSteps] + out_c * (static_cast<double>(i + 1 - shape.n_tail - shape.core) * shape.spacing);
    } else {
      const double target = static_cast<double>(i - shape.n_tail) * shape.spacing;
      while (seg < kSteps && arc[seg] < target) ++seg;
      const double f = arc[seg] > arc[seg - 1] ? (target - arc[seg - 1]) / (arc[seg] - arc[seg - 1]) : 0.0;
      p = knot[seg - 1] + (knot[seg] - knot[seg - 1]) * std::min(1.0, std::max(0.0, f));
    }
    chain.points.push_back(p);
  }

  GaussianSampler noise(seed);
  for (auto& p : chain.points) {
    p.x += shape.jitter * noise.next();
    p.y += shape.jitter * noise.next();
    p.z += shape.jitter * noise.next();
  }
  chain.annotation = KnotAnnotation::from_core(length, shape.n_tail, shape.n_tail + shape.core - 1);
  return chain;
}

std::vector<BackboneChain> trefoil_dataset(std::size_t n_deep, std::size_t n_shallow, std::uint64_t seed) {
  std::vector<BackboneChain> out;
  for (std::size_t i = 0; i < n_deep + n_shallow; ++i) {
    const bool deep = i < n_deep;
    SplitMix64 g(derive_seed(seed, 2 * i));
    const std::size_t length = 108 + g.below(20);
    TrefoilShape shape;
    if (deep) {
      shape.core = 18 + g.below(5);
      shape.n_tail = (length - shape.core) / 2 + g.below(5) - 2;
      shape.c_tail = length - shape.core - shape.n_tail;
    } else {
      shape.n_tail = g.below(2);
      shape.c_tail = 1 + g.below(3);
      shape.core = length - shape.n_tail - shape.c_tail;
    }
    const std::size_t number = deep ? i : i - n_deep;
    char id[32];
    std::snprintf(id, sizeof id, "%s_%02zu", deep ? "deep" : "shallow", number);
    out.push_back(open_trefoil(id, shape, derive_seed(seed, 2 * i + 1)));
  }
  return out;
}

void write_dataset(const std::filesystem::path& dir, const std::vector<BackboneChain>& chains) {
  std::string sidecar = "id\tlength\tcore_start\tcore_end\thomology_class\n";
  for (const auto& c : chains) {
    text::write_file(dir / (c.id + ".xyz"), write_xyz(c.points));
    if (!c.annotation) continue;
    sidecar += c.id + '\t' + std::to_string(c.length()) + '\t' + std::to_string(c.annotation->core_start) + '\t' +
               std::to_string(c.annotation->core_end) + "\t\n";
  }
  text::write_file(dir / "annotations.tsv", sidecar);
}

}  // namespace knotph
