#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "goursat/ensemble.hpp"
#include "goursat/grid.hpp"
#include "goursat/solver.hpp"
#include "goursat/source.hpp"

namespace goursat::io {

/// Effective configuration of a run. Defaults < config file < CLI flags; the
/// effective values are echoed verbatim into every output file so a run can
/// be replayed from its artifacts alone.
struct RunConfig {
  // [grid]
  double x_f{1};
  double t_f{1};
  long long n_x{100};
  long long n_t{100};
  // [source]
  std::string source{"zero"};  ///< zero | affine | quadratic | cubic | sine-gordon |
                               ///< neg-sine-gordon | exponential
  double alpha{0};
  double beta{0};
  double k{1};
  double y1{0.5};
  // [noise]
  double sigma{0};
  std::uint64_t seed{0};
  // [bc]
  std::string bc{"constant"};  ///< constant | linear-exact | table
  double bc_value{0};
  double c1{1};
  double c2{0};
  double bc_alpha{1};
  std::string bc_f_file;
  std::string bc_g_file;
  // [run]
  long long trials{1};
  double guard{1e6};
  /// auto | full | slices | points. auto keeps full fields on lattices up to
  /// 4M points and falls back to slice recording (t = t_f if nothing is
  /// configured) beyond that, so huge-grid ensembles stay within two grid
  /// rows of memory per trial.
  std::string record{"auto"};
  std::vector<double> slices_x;
  std::vector<double> slices_t;
  std::vector<std::array<double, 2>> points;
  /// when set, ensembles also write mask.csv = indicator of {mean >= level}
  double mask_level{std::numeric_limits<double>::quiet_NaN()};
  int threads{0};
  std::string out{"."};
};

// --- config text format -----------------------------------------------------

/// Parses the sectioned key = value config format. Unknown sections or keys
/// and malformed values raise std::runtime_error naming the offending line.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::string& path);

/// Canonical text form; parse(emit(cfg)) reproduces cfg exactly.
std::string emit_config(const RunConfig& cfg);

/// One-line form used in CSV header comments.
std::string emit_config_compact(const RunConfig& cfg);

// --- CLI flag value parsers ---------------------------------------------------

void apply_grid_flag(RunConfig& cfg, const std::string& value);    ///< "100x100" or "100"
void apply_domain_flag(RunConfig& cfg, const std::string& value);  ///< "2x3" or "2"
void apply_source_flag(RunConfig& cfg, const std::string& value);  ///< "affine:alpha=1,beta=0"
void apply_bc_flag(RunConfig& cfg, const std::string& value);      ///< "constant:1" etc.
void apply_record_flag(RunConfig& cfg, const std::string& value);  ///< "slices:t=40;x=5" etc.

// --- typed views of the config ------------------------------------------------

GridSpec<double> make_grid(const RunConfig& cfg);
SourceSpec<double> make_source(const RunConfig& cfg);
BoundaryData<double> make_boundary(const RunConfig& cfg, const GridSpec<double>& spec);
EnsembleSpec<double> make_ensemble_spec(const RunConfig& cfg);

// --- CSV ----------------------------------------------------------------------

/// Field CSV layout: '#' comment header (version, seed, grid, config echo),
/// then row 1 = t coordinates (leading corner cell empty), column 1 = x
/// coordinates, body = values. Numbers carry 17 significant digits so 64-bit
/// floats round-trip exactly and repeated runs are byte-identical.
void write_matrix_csv(const std::string& path, const std::vector<double>& xs,
                      const std::vector<double>& ts,
                      const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>& values,
                      const std::vector<std::string>& header_comments);

void write_field_csv(const std::string& path, const ScalarField<double>& field,
                     const std::vector<std::string>& header_comments);

struct CsvMatrix {
  std::vector<double> xs;
  std::vector<double> ts;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic> values;
  std::vector<std::string> comments;
};

CsvMatrix read_matrix_csv(const std::string& path);

/// read_matrix_csv plus reconstruction of the quarter-plane grid; requires
/// coordinates starting at 0.
ScalarField<double> read_field_csv(const std::string& path);

/// Formats a double with 17 significant digits (shortest within %.17g).
std::string format_double(double v);

// --- subcommand drivers ---------------------------------------------------------

/// Single run; writes field.csv and summary.json under cfg.out.
int cmd_solve(const RunConfig& cfg, std::ostream& log);

/// Monte Carlo run; writes mean/sd CSVs (full mode) or per-slice CSVs plus
/// summary.json under cfg.out.
int cmd_ensemble(const RunConfig& cfg, std::ostream& log);

/// Brownian-sheet shortcut: zero drift, zero boundaries; records the far
/// corner in addition to any configured points.
int cmd_sheet(RunConfig cfg, std::ostream& log);

/// Reference-solution tables on an arbitrary rectangle.
struct ExactConfig {
  std::string family{"linear-exact"};  ///< linear-exact | kink | breather
  double c1{1}, c2{0}, alpha{1};
  double u{0}, x0{0};
  int sign{+1};
  double omega{0.5};
  double x_min{0}, x_max{1}, t_min{0}, t_max{1};
  long long n_x{100}, n_t{100};
  std::string out{"."};
};
int cmd_exact(const ExactConfig& cfg, std::ostream& log);

/// Reads a field CSV, extracts a slice and counts its peaks.
struct PeaksConfig {
  std::string input;
  char axis{'t'};  ///< 't': slice at fixed t over x; 'x': fixed x over t
  double coordinate{0};
  double prominence_fraction{0.10};  ///< of the slice range
};
int cmd_peaks(const PeaksConfig& cfg, std::ostream& log);

/// Built-in oracle suite: telescoping identity, fixed-point equivalence,
/// sheet covariance, deterministic convergence. Returns the number of failed
/// checks. perturb_marching is a negative-control hook that injects a small
/// error before the equivalence comparison.
struct ValidateOptions {
  bool perturb_marching{false};
};
int cmd_validate(std::ostream& log, const ValidateOptions& opts = {});

}  // namespace goursat::io
