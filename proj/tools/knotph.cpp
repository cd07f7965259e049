// knotph command-line pipeline: ingest, ph, compare, test, generator, noise, synth.
#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "knotph/error.hpp"
#include "knotph/pipeline.hpp"
#include "knotph/synthetic.hpp"
#include "knotph/text.hpp"

namespace fs = std::filesystem;
using namespace knotph;

namespace {

constexpr int kStructureFailure = 1;
constexpr int kConfigFailure = 2;

void print_report(const StageReport& report) {
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& f : report.failures) std::cerr << "failed: " << f.id << " (" << f.stage << "): " << f.message << '\n';
}

std::string number(const std::optional<double>& v) { return v ? text::format_double(*v, 6) : "NA"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Degree-1 persistent homology of open curves"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir, seed, workers;
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--out", out_dir, "output directory (overrides output_dir)");
  app.add_option("--seed", seed, "random seed (overrides seed)");
  app.add_option("--workers", workers, "worker threads, 0 = all cores");

  std::map<std::string, std::string> overrides;
  const auto flag = [&](CLI::App* cmd, const std::string& name, const std::string& key, const std::string& help) {
    cmd->add_option_function<std::string>(name, [&overrides, key](const std::string& v) { overrides[key] = v; }, help);
  };

  auto* ingest = app.add_subcommand("ingest", "read .xyz backbones, interpolate, write clouds and manifest");
  flag(ingest, "--input", "input_dir", "directory of .xyz files");
  flag(ingest, "--annotations", "annotation_path", "annotation TSV sidecar");
  flag(ingest, "--similarity", "similarity_path", "sequence similarity CSV");
  flag(ingest, "--interp", "interp_factor", "interpolated points per segment");

  auto* ph = app.add_subcommand("ph", "persistence diagrams and landscapes");
  flag(ph, "--max-scale", "max_scale", "filtration cap or 'auto'");

  auto* compare = app.add_subcommand("compare", "distance matrix, Isomap embedding, silhouettes");
  flag(compare, "--metric", "metric", "landscape or wasserstein");
  flag(compare, "--neighbors", "n_neighbors", "Isomap neighbours");
  flag(compare, "--norm-p", "landscape_p", "landscape norm exponent");

  TestRequest request;
  std::string layers;
  auto* test = app.add_subcommand("test", "randomization test between two classes");
  test->add_option("--class-a", request.class_a, "first class")->required();
  test->add_option("--class-b", request.class_b, "second class")->required();
  test->add_option("--by", request.by, "class labelling: homology or depth")
      ->check(CLI::IsMember({"homology", "depth"}));
  test->add_option("--layers", layers, "comma-separated landscape layers for the heat map");
  flag(test, "-k", "randomization_k", "number of random repartitions");
  flag(test, "--norm-p", "landscape_p", "landscape norm exponent");

  std::string generator_id;
  std::size_t generator_k = 2;
  std::optional<double> t_star;
  auto* generator = app.add_subcommand("generator", "cycle representative behind a landscape peak");
  generator->add_option("--id", generator_id, "structure id")->required();
  generator->add_option("-k", generator_k, "landscape layer")->check(CLI::PositiveNumber);
  generator->add_option("--t-star", t_star, "look for the local maximum nearest this t");

  auto* noise = app.add_subcommand("noise", "robustness under Gaussian noise");
  flag(noise, "--sigmas", "sigmas", "comma-separated noise levels");

  std::string synth_dir;
  std::size_t n_deep = 20, n_shallow = 20;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "write a synthetic deep/shallow trefoil dataset");
  synth->add_option("--dir", synth_dir, "destination directory")->required();
  synth->add_option("--deep", n_deep, "number of deep trefoils");
  synth->add_option("--shallow", n_shallow, "number of shallow trefoils");
  synth->add_option("--synth-seed", synth_seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigFailure;
  }

  try {
    if (synth->parsed()) {
      write_dataset(synth_dir, trefoil_dataset(n_deep, n_shallow, synth_seed));
      std::cout << "wrote " << n_deep + n_shallow << " structures to " << synth_dir << '\n';
      return 0;
    }

    PipelineConfig config = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    for (const auto& [k, v] : overrides) config.set(k, v, fs::current_path());
    if (!out_dir.empty()) config.set("output_dir", out_dir, fs::current_path());
    if (!seed.empty()) config.set("seed", seed);
    if (!workers.empty()) config.set("workers", workers);
    if (config.output_dir.empty()) throw ConfigError("no output directory: set output_dir or pass --out");

    StageReport report;
    if (ingest->parsed()) {
      const auto m = cmd_ingest(config, report);
      std::cout << "ingested " << m.structures.size() << " structures\n";
    } else {
      RunManifest m = load_manifest(config);
      if (ph->parsed()) {
        cmd_ph(m, config, report);
        std::cout << "diagrams for " << m.structures.size() - report.failures.size() << " of " << m.structures.size()
                  << " structures\n";
      } else if (compare->parsed()) {
        const auto r = cmd_compare(m, config, config.metric, report);
        std::cout << "silhouette by homology: " << number(r.silhouette_homology)
                  << "\nsilhouette by depth: " << number(r.silhouette_depth) << '\n';
      } else if (test->parsed()) {
        for (const auto part : text::split(layers, ',')) {
          if (text::trim(part).empty()) continue;
          const auto k = text::to_int(text::trim(part));
          if (!k || *k < 1) throw ConfigError("--layers expects positive integers");
          request.layers.insert(static_cast<int>(*k));
        }
        const auto r = cmd_test(m, config, request, report);
        std::cout << request.class_a << " vs " << request.class_b << ": t_obs " << text::format_double(r.t_obs, 6)
                  << ", p " << text::format_double(r.p_value, 6) << " (k = " << r.draws << ")\n";
      } else if (generator->parsed()) {
        const auto r = cmd_generator(m, config, generator_id, generator_k, t_star, report);
        std::cout << "lambda_" << r.k << " peak at t = " << text::format_double(r.peak.t, 6) << ", pair ("
                  << text::format_double(r.pair.birth, 6) << ", " << text::format_double(r.pair.death, 6) << "), "
                  << r.cycle.edges.size() << " edges, core overlap " << number(r.core_overlap) << '\n';
      } else if (noise->parsed()) {
        for (const auto& row : cmd_noise(m, config, report))
          std::cout << "sigma " << text::format_double(row.sigma, 6) << ": homology "
                    << number(row.silhouette_homology) << ", depth " << number(row.silhouette_depth) << '\n';
      }
    }
    print_report(report);
    return report.failures.empty() ? 0 : kStructureFailure;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kStructureFailure;
  }
}
