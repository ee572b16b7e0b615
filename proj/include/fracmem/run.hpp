#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fracmem/io.hpp"
#include "fracmem/symmetry.hpp"

namespace fracmem {

enum class Command {
  solve,
  optimize,
  alpha_bar,
  convert_pn,
  experiment_ball,
  experiment_annulus,
  validate_operator
};

std::string to_string(Command command);
Command command_from_string(const std::string& name);

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSolver = 3;

/// A parsed run configuration. Defaults apply to absent keys; unknown keys
/// are rejected by parse_config.
struct RunConfig {
  Command command = Command::optimize;
  ShapeSpec shape = ShapeSpec::interval(-1.0, 1.0);
  bool shape_given = false;
  double s = 0.5;
  double alpha = 1.0;
  bool alpha_given = false;
  double area_fraction = 0.3;
  int resolution = 64;
  std::uint64_t seed = 1;

  // tolerances
  double eigen_residual = 1e-9;
  double eigen_change = 1e-12;
  double bisection = 1e-8;
  int max_iterations = 500;

  std::string output_dir = "out";

  // solve: D as run lengths over the inside cells (zeros first)
  std::vector<std::size_t> configuration;

  // convert-pn
  std::string direction = "forward";
  PhysicalParams physical;
  MembraneParams membrane;
  double theta = 0.0;

  // experiment-ball
  double alpha_factor = 0.5;

  // experiment-annulus
  std::vector<double> b_list{1.0, 2.0, 4.0, 8.0};
  double delta = 0.3;
  int cells_per_width = 8;
  bool disk_control = true;

  // validate-operator
  std::vector<double> s_list{0.25, 0.5, 0.75};
  std::vector<int> n_list{64, 128, 256};

  EigenOptions eigen_options() const;
  OptimizeOptions optimize_options() const;
};

/// Parses a JSON configuration for `command`. A "command" key, if present,
/// must name the same command. Throws ValidationError naming the offending key.
RunConfig parse_config(const io::Json& doc, Command command);

/// Artifacts of a run, keyed by file name, plus the result document.
struct RunOutput {
  io::Json result;
  std::map<std::string, std::string> files;
};

/// Executes a validated configuration without touching the filesystem.
RunOutput execute(const RunConfig& config);

/// Writes every artifact (result.json included) atomically into `dir`.
void write_outputs(const RunOutput& output, const std::filesystem::path& dir);

/// Entry point shared by the command line tool: parse, execute, write.
/// Returns the process exit code; diagnostics go to `err`.
int run_command(const std::string& command, const std::filesystem::path& config_path,
                const std::optional<std::filesystem::path>& out_dir,
                const std::optional<std::uint64_t>& seed, std::ostream& err);

}  // namespace fracmem
