#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "apmc/grid.hpp"
#include "apmc/scenario.hpp"
#include "json.hpp"

namespace apmc {

/// Density and flux at one output time. jy is empty (no values) in 1D.
struct Snapshot {
  double time = 0.0;
  GridFunction rho;
  GridFunction jx;
  GridFunction jy;
};

enum class Norm { L1, Linf };
enum class Field { rho, j };
Norm parse_norm(std::string_view s);
Field parse_field(std::string_view s);

/// L1 = sum |a-b| * cell volume, Linf = max |a-b|. Throws
/// std::invalid_argument when the grids differ. NaN entries propagate.
double compute_error(const GridFunction& a, const GridFunction& b, Norm norm);
/// Field j compares the flux vector: per cell |(jx,jy)_a - (jx,jy)_b|.
double compute_error(const Snapshot& a, const Snapshot& b, Norm norm, Field field);
double compute_error(const std::filesystem::path& run_csv, const std::filesystem::path& ref_csv,
                     Norm norm, Field field);

/// CSV with header `x,rho,j` (1D) or `x,y,rho,jx,jy` (2D), one row per cell
/// in index order, values printed with 17 significant digits.
void write_snapshot_csv(const std::filesystem::path& path, const Snapshot& s);
/// Rebuilds the grid from the cell centres. Needs at least two cells per axis.
Snapshot read_snapshot_csv(const std::filesystem::path& path);

/// Diffusion-limit flux j = -(D/sigma_s) grad rho, from face differences
/// averaged to cells (Dirichlet faces use the half-cell distance).
void fick_flux(const GridFunction& rho, double diffusion, const std::vector<double>& sigma_s,
               const BoundaryConditions& bc, GridFunction& jx, GridFunction& jy);

struct ReplicateResult {
  std::vector<Snapshot> snapshots;
  double particle_mass = 0.0;
  std::size_t final_live_particles = 0;
  std::size_t steps = 0;
  std::size_t ghost_layers = 0;
};

/// One particle run with the stream family of replicate r.
ReplicateResult run_replicate(const Scenario& s, std::size_t replicate);
/// Deterministic solve (kinetic_ref or diffusion_ref) on the scenario grid
/// refined `options.refine` times, restricted back to the scenario grid.
std::vector<Snapshot> run_deterministic(const Scenario& s, Scheme scheme,
                                        const SolverOptions& options);

struct ErrorStats {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(replicates)
  std::vector<double> values;
};
ErrorStats error_stats(std::vector<double> values);

struct OutputErrors {
  double time = 0.0;
  ErrorStats rho_l1, rho_linf, j_l1, j_linf;
};

struct ComparisonReport {
  std::string scenario;
  std::string scheme;
  std::string reference_scheme;  // empty without a reference
  std::size_t particles = 0;
  double particle_mass = 0.0;
  std::size_t replicates = 0;
  std::vector<std::uint64_t> replicate_seeds;
  std::vector<std::size_t> final_live_particles;
  double dt = 0.0;
  std::size_t steps = 0;
  double runtime_seconds = 0.0;
  std::vector<OutputErrors> outputs;
};
nlohmann::json to_json(const ComparisonReport& report);

struct RunResult {
  /// Replicate mean at each output time.
  std::vector<Snapshot> mean;
  std::vector<std::vector<Snapshot>> replicates;
  std::vector<Snapshot> reference;
  ComparisonReport report;
  std::vector<std::filesystem::path> files;
};

struct RunOptions {
  /// Where CSVs and report.json go; nothing is written when unset.
  std::optional<std::filesystem::path> out_dir;
};

RunResult run_scenario(const Scenario& s, const RunOptions& options = {});

}  // namespace apmc
