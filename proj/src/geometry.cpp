#include "knotph/geometry.hpp"

#include <cmath>
#include <string>

#include "knotph/error.hpp"
#include "knotph/random.hpp"
#include "knotph/text.hpp"

namespace knotph {

bool Point3::finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }

double euclidean(const Point3& a, const Point3& b) noexcept {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

std::string_view to_string(DepthClass c) noexcept {
  switch (c) {
    case DepthClass::kDeep:
      return "deep";
    case DepthClass::kShallow:
      return "shallow";
    case DepthClass::kNeither:
      break;
  }
  return "neither";
}

std::optional<DepthClass> parse_depth_class(std::string_view s) noexcept {
  if (s == "deep") return DepthClass::kDeep;
  if (s == "shallow") return DepthClass::kShallow;
  if (s == "neither") return DepthClass::kNeither;
  return std::nullopt;
}

KnotAnnotation KnotAnnotation::from_core(std::size_t length, std::size_t core_start,
                                         std::size_t core_end) {
  if (!(core_start <= core_end && core_end < length))
    throw ParameterError("knot core [" + std::to_string(core_start) + ", " +
                         std::to_string(core_end) + "] outside chain of length " +
                         std::to_string(length));
  KnotAnnotation a;
  a.core_start = core_start;
  a.core_end = core_end;
  a.n_tail_len = core_start;
  a.c_tail_len = length - 1 - core_end;
  a.depth_class = classify_depth(knot_depth(length, a.n_tail_len, a.c_tail_len));
  return a;
}

void BackboneChain::validate() const {
  if (points.size() < 2)
    throw ParseError("chain '" + id + "' has " + std::to_string(points.size()) +
                     " points, need at least 2");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].finite()) throw ParseError("chain '" + id + "' has a non-finite coordinate");
    if (i > 0 && points[i] == points[i - 1])
      throw ParseError("chain '" + id + "' repeats point " + std::to_string(i - 1) +
                       " at index " + std::to_string(i));
  }
}

BackboneChain parse_xyz(std::string_view text, std::string id) {
  BackboneChain chain;
  chain.id = std::move(id);
  std::optional<long long> last_residue;
  std::size_t line_no = 0;
  for (std::string_view line : text::lines(text)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto tokens = text::split_ws(body);
    if (tokens.size() != 3 && tokens.size() != 4)
      throw ParseError("expected 3 or 4 fields, found " + std::to_string(tokens.size()), line_no);
    std::size_t first = 0;
    if (tokens.size() == 4) {
      const auto residue = text::to_int(tokens[0]);
      if (!residue) throw ParseError("residue index '" + std::string(tokens[0]) + "' is not an integer", line_no);
      if (last_residue && *residue <= *last_residue)
        throw ParseError("residue index " + std::to_string(*residue) + " does not increase", line_no);
      last_residue = residue;
      first = 1;
    }
    double c[3];
    for (int k = 0; k < 3; ++k) {
      const auto v = text::to_double(tokens[first + k]);
      if (!v || !std::isfinite(*v))
        throw ParseError("'" + std::string(tokens[first + k]) + "' is not a finite number", line_no);
      c[k] = *v;
    }
    chain.points.push_back({c[0], c[1], c[2]});
  }
  if (chain.points.size() < 2)
    throw ParseError("need at least 2 points, found " + std::to_string(chain.points.size()));
  for (std::size_t i = 1; i < chain.points.size(); ++i)
    if (chain.points[i] == chain.points[i - 1])
      throw ParseError("consecutive points " + std::to_string(i - 1) + " and " + std::to_string(i) +
                       " coincide");
  return chain;
}

std::string write_xyz(std::span<const Point3> points) {
  std::string out;
  out.reserve(points.size() * 64);
  for (const auto& p : points) {
    out += text::format_double(p.x);
    out += ' ';
    out += text::format_double(p.y);
    out += ' ';
    out += text::format_double(p.z);
    out += '\n';
  }
  return out;
}

BackboneChain extract_ca_from_pdb(std::string_view text, std::string_view chain_id) {
  BackboneChain chain;
  chain.id = std::string(chain_id);
  std::size_t line_no = 0;
  bool seen_model = false;
  for (std::string_view line : text::lines(text)) {
    ++line_no;
    if (line.starts_with("MODEL")) {
      if (seen_model) break;
      seen_model = true;
      continue;
    }
    if (line.starts_with("ENDMDL")) break;
    if (!line.starts_with("ATOM  ")) continue;
    if (line.size() < 54) throw ParseError("ATOM record shorter than 54 columns", line_no);
    if (text::trim(line.substr(12, 4)) != "CA") continue;
    const char alt = line[16];
    if (alt != ' ' && alt != 'A') continue;
    if (line.substr(21, 1) != chain_id) continue;
    double c[3];
    for (int k = 0; k < 3; ++k) {
      const auto field = line.substr(30 + 8 * k, 8);
      const auto v = text::to_double(field);
      if (!v || !std::isfinite(*v))
        throw ParseError("unreadable coordinate '" + std::string(field) + "'", line_no);
      c[k] = *v;
    }
    chain.points.push_back({c[0], c[1], c[2]});
  }
  if (chain.points.empty())
    throw EmptyInputError("no CA atoms for chain '" + std::string(chain_id) + "'");
  return chain;
}

PointCloud interpolate(const BackboneChain& chain, int d) {
  if (d < 0) throw ParameterError("interpolation factor must be >= 0");
  PointCloud cloud;
  cloud.source_id = chain.id;
  cloud.interp_factor = d;
  const auto n = chain.points.size();
  if (n == 0) return cloud;
  cloud.points.reserve(n + (n - 1) * static_cast<std::size_t>(d));
  for (std::size_t s = 0; s + 1 < n; ++s) {
    const Point3& p1 = chain.points[s];
    const Point3 step = chain.points[s + 1] - p1;
    cloud.points.push_back(p1);
    const double denom = d + 1;
    for (int i = 1; i <= d; ++i) {
      const double k = i;
      cloud.points.push_back({p1.x + step.x * k / denom, p1.y + step.y * k / denom,
                              p1.z + step.z * k / denom});
    }
  }
  cloud.points.push_back(chain.points.back());
  return cloud;
}

std::size_t backbone_index(std::size_t cloud_index, int interp_factor) noexcept {
  return cloud_index / static_cast<std::size_t>(interp_factor + 1);
}

double knot_depth(std::size_t length, std::size_t n_tail_len, std::size_t c_tail_len) {
  const double t = static_cast<double>(length);
  return static_cast<double>(n_tail_len) * static_cast<double>(c_tail_len) / (t * t);
}

double knot_depth(const BackboneChain& chain) {
  if (!chain.annotation)
    throw AnnotationRequiredError("chain '" + chain.id + "' has no knot annotation");
  return knot_depth(chain.length(), chain.annotation->n_tail_len, chain.annotation->c_tail_len);
}

DepthClass classify_depth(double depth) noexcept {
  if (depth > 0.05) return DepthClass::kDeep;
  if (depth < 0.005) return DepthClass::kShallow;
  return DepthClass::kNeither;
}

PointCloud perturb(const PointCloud& cloud, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ParameterError("sigma must be >= 0");
  PointCloud out = cloud;
  if (sigma == 0.0) return out;
  GaussianSampler normal(seed);
  for (auto& p : out.points) {
    p.x += sigma * normal.next();
    p.y += sigma * normal.next();
    p.z += sigma * normal.next();
  }
  return out;
}

std::map<std::string, AnnotationRecord> parse_annotation_tsv(std::string_view content) {
  std::map<std::string, AnnotationRecord> out;
  const auto all = text::lines(content);
  std::size_t line_no = 0;
  bool header_seen = false;
  for (std::string_view line : all) {
    ++line_no;
    if (text::trim(line).empty() || line.front() == '#') continue;
    auto fields = text::split(line, '\t');
    if (!header_seen) {
      header_seen = true;
      if (fields.size() < 4 || text::trim(fields[0]) != "id")
        throw ParseError("annotation header must start with 'id\\tlength\\tcore_start\\tcore_end'",
                         line_no);
      continue;
    }
    if (fields.size() < 4 || fields.size() > 5)
      throw ParseError("expected 4 or 5 tab-separated fields", line_no);
    AnnotationRecord r;
    r.id = std::string(text::trim(fields[0]));
    const auto length = text::to_int(fields[1]);
    const auto start = text::to_int(fields[2]);
    const auto end = text::to_int(fields[3]);
    if (!length || !start || !end || *length < 0 || *start < 0 || *end < 0)
      throw ParseError("length/core_start/core_end must be nonnegative integers", line_no);
    r.length = static_cast<std::size_t>(*length);
    r.core_start = static_cast<std::size_t>(*start);
    r.core_end = static_cast<std::size_t>(*end);
    if (!(r.core_start <= r.core_end && r.core_end < r.length))
      throw ParseError("core indices outside [0, length)", line_no);
    if (fields.size() == 5) r.homology_class = std::string(text::trim(fields[4]));
    if (!out.emplace(r.id, r).second) throw ParseError("duplicate id '" + r.id + "'", line_no);
  }
  return out;
}

}  // namespace knotph
