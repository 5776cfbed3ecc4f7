// fas-lora <mode> --config <path> [--seed S] [--trials T] [--out PATH]

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "faslora/config.hpp"
#include "faslora/experiments.hpp"
#include "faslora/phy.hpp"

namespace fs = std::filesystem;
using namespace faslora;

namespace {

// Output stream: the --out file, or stdout when no path was given.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw ConfigError("out", "cannot write '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string sibling(const std::string& path, const std::string& suffix, const std::string& fallback) {
  if (path.empty() || path == "-") return fallback + suffix;
  const fs::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

void write_gnuplot(const ExperimentSpec& spec, const std::string& csv) {
  if (!spec.gnuplot || csv.empty() || csv == "-") return;
  std::ofstream gp(sibling(csv, ".gp", "plot"));
  const char* x = spec.sweep_variable == "R2" ? "3" : spec.sweep_variable == "SF" ? "1" : "2";
  gp << "set datafile separator ','\n"
     << "set key outside\n"
     << "set ylabel 'coverage probability'\n"
     << "set xlabel '" << spec.sweep_variable << "'\n";
  if (spec.sweep_variable == "N") gp << "set logscale x\n";
  gp << "plot for [m in '" << detail::join(spec.methods) << "'] '" << fs::path(csv).filename().string()
     << "' using " << x << ":(strcol(6) eq m ? $7 : NaN) with linespoints title m\n";
}

int run(const ExperimentSpec& spec) {
  if (spec.mode == "channel-stats") {
    const auto cs = channel_stats(spec.geometry(), spec.energy_fraction, spec.fit_samples, spec.seed);
    Output out(spec.output_path);
    write_header(out.stream(), spec);
    FitReport::write_csv_header(out.stream());
    cs.report.write_csv_row(out.stream());
    std::ofstream cdf(sibling(spec.output_path, "_cdf.csv", "channel_stats"));
    write_header(cdf, spec);
    write_channel_cdf_csv(cdf, cs);
    std::ofstream model(sibling(spec.output_path, "_blocks.txt", "channel_stats"));
    model << cs.fit.model.serialize();
    return 0;
  }
  if (spec.mode == "analyze") {
    const auto rows = run_analyze(spec);
    Output out(spec.output_path);
    write_header(out.stream(), spec);
    write_analyze_csv(out.stream(), rows);
    return 0;
  }
  if (spec.mode == "simulate" || spec.mode == "sweep") {
    ExperimentSpec s = spec;
    if (s.mode == "simulate") {
      s.methods = {"montecarlo"};
      s.sweep_variable = "N";
      s.sweep_values = {s.cfg.N};
    }
    const auto rows = run_sweep(s);
    Output out(spec.output_path);
    write_header(out.stream(), spec);
    write_coverage_csv_header(out.stream());
    for (const auto& r : rows) write_coverage_csv_row(out.stream(), r);
    if (spec.mode == "sweep") write_gnuplot(spec, spec.output_path);
    return 0;
  }
  if (spec.mode == "phy-demo") {
    const auto r = collision_demo();
    const std::string base = spec.output_path.empty() ? "phy_demo.csv" : spec.output_path;
    std::ofstream a(sibling(base, "_separate.csv", "phy_demo"));
    std::ofstream b(sibling(base, "_combined.csv", "phy_demo"));
    write_header(a, spec);
    write_header(b, spec);
    write_collision_separate_csv(a, r);
    write_collision_combined_csv(b, r);
    return 0;
  }
  throw ConfigError("mode", "unknown mode '" + spec.mode + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FAS-assisted LoRa coverage experiments"};
  std::string mode, config_path, out_path;
  long long seed = -1, trials = -1;
  int workers = 0;
  app.add_option("mode", mode, "channel-stats | analyze | simulate | sweep | phy-demo")
      ->required()
      ->check(CLI::IsMember(experiment_modes()));
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--seed", seed, "random seed")->check(CLI::NonNegativeNumber);
  app.add_option("--trials", trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  app.add_option("--out", out_path, "output CSV path (stdout if omitted)");
  app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; any other usage error shares the config-error code
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    ExperimentSpec spec = config_path.empty() ? ExperimentSpec{} : load_config(config_path);
    spec.mode = mode;
    if (seed >= 0) spec.seed = static_cast<std::uint64_t>(seed);
    if (trials > 0) spec.trials = trials;
    if (workers > 0) spec.workers = workers;
    if (!out_path.empty()) spec.output_path = out_path;
    spec.validate();
    return run(spec);
  } catch (const ConfigError& e) {
    std::cerr << "fas-lora: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "fas-lora: numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "fas-lora: " << e.what() << '\n';
    return 1;
  }
}
