#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "apmc/harness.hpp"
#include "apmc/scenario.hpp"

using namespace apmc;

namespace {

Scenario load(const std::string& spec) {
  const std::string prefix = "builtin:";
  if (spec.rfind(prefix, 0) == 0) return builtin_scenario(spec.substr(prefix.size()));
  return load_scenario_file(spec);
}

void print_summary(const RunResult& r) {
  const auto& rep = r.report;
  std::printf("%s: scheme %s, %zu replicate(s), dt %.6g, %zu steps, %.2f s\n", rep.scenario.c_str(),
              rep.scheme.c_str(), rep.replicates, rep.dt, rep.steps, rep.runtime_seconds);
  if (rep.reference_scheme.empty()) return;
  for (const auto& o : rep.outputs)
    std::printf("  t=%-8.6g L1(rho)=%.4g +- %.2g  Linf(rho)=%.4g  L1(j)=%.4g  vs %s\n", o.time,
                o.rho_l1.mean, o.rho_l1.std_error, o.rho_linf.mean, o.j_l1.mean,
                rep.reference_scheme.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asymptotic-preserving Monte Carlo experiments"};
  app.require_subcommand(0, 1);
  bool list = false;
  app.add_flag("--list-builtins", list, "List the built-in scenarios and exit");

  auto* run = app.add_subcommand("run", "Run a scenario file or builtin:<name>");
  std::string scenario_spec, out_dir, scheme, noise;
  std::uint64_t seed = 0;
  std::size_t particles = 0, replicates = 0;
  unsigned workers = 0;
  run->add_option("scenario", scenario_spec, "Scenario JSON file, or builtin:<name>")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");
  auto* particles_opt = run->add_option("--particles", particles, "Override the particle count");
  run->add_option("--out", out_dir, "Output directory (default out/<scenario name>)");
  run->add_option("--scheme", scheme, "Override the scheme")
      ->check(CLI::IsMember({"standard_mc", "apmc", "apmc_micromacro", "heat_walk", "kinetic_ref",
                             "diffusion_ref"}));
  run->add_option("--noise-speed", noise, "Speed in the RT noise amplitude")
      ->check(CLI::IsMember({"scaled", "unscaled"}));
  auto* workers_opt = run->add_option("--workers", workers, "Threads per replicate");
  auto* reps_opt = run->add_option("--replicates", replicates, "Override the replicate count");

  auto* show = app.add_subcommand("show", "Print a built-in scenario as JSON");
  std::string show_name;
  show->add_option("name", show_name, "Built-in scenario name")->required();

  auto* err = app.add_subcommand("error", "Distance between two snapshot CSVs");
  std::string run_csv, ref_csv, norm = "L1", field = "rho";
  err->add_option("run_csv", run_csv)->required()->check(CLI::ExistingFile);
  err->add_option("ref_csv", ref_csv)->required()->check(CLI::ExistingFile);
  err->add_option("--norm", norm, "L1 or Linf")->check(CLI::IsMember({"L1", "Linf"}));
  err->add_option("--field", field, "rho or j")->check(CLI::IsMember({"rho", "j"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (list) {
      for (const auto& name : builtin_names())
        std::printf("%-24s %s\n", name.c_str(), builtin_scenario(name).description.c_str());
      return 0;
    }
    if (*show) {
      std::cout << serialize_scenario(builtin_scenario(show_name)) << '\n';
      return 0;
    }
    if (*err) {
      std::printf("%.17g\n", compute_error(run_csv, ref_csv, parse_norm(norm), parse_field(field)));
      return 0;
    }
    if (*run) {
      Scenario s = load(scenario_spec);
      if (*seed_opt) s.seed = seed;
      if (*particles_opt) s.particles = particles;
      if (!scheme.empty()) s.scheme = parse_scheme(scheme);
      if (!noise.empty()) s.noise_speed = noise == "scaled" ? rt::NoiseSpeed::scaled : rt::NoiseSpeed::unscaled;
      if (*workers_opt) s.workers = workers;
      if (*reps_opt) s.replicates = replicates;
      s.validate();
      RunOptions opts;
      opts.out_dir = out_dir.empty() ? std::filesystem::path("out") / (s.name.empty() ? "run" : s.name)
                                     : std::filesystem::path(out_dir);
      const RunResult r = run_scenario(s, opts);
      print_summary(r);
      std::printf("wrote %zu files to %s\n", r.files.size(), opts.out_dir->string().c_str());
      return 0;
    }
    std::cout << app.help();
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
