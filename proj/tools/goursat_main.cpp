#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "goursat/io.hpp"
#include "goursat/version.hpp"

namespace {

// Shared run flags. Precedence: built-in defaults < --config file < flags.
struct CommonFlags {
  std::optional<std::string> config;
  std::optional<std::string> grid, domain, source, bc, record, out;
  std::optional<double> sigma, guard, mask_level;
  std::optional<std::uint64_t> seed;
  std::optional<long long> trials;
  std::optional<int> threads;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "config file (sectioned key = value)");
  cmd->add_option("--grid", flags.grid, "cells per axis: N or NXxNT");
  cmd->add_option("--domain", flags.domain, "extents: X or XFxTF");
  cmd->add_option("--source", flags.source,
                  "drift: zero | affine[:alpha=..,beta=..] | quadratic[:k=..] | "
                  "cubic[:k=..,y1=..] | sine-gordon | neg-sine-gordon | exponential");
  cmd->add_option("--bc", flags.bc,
                  "boundary data: constant[:value] | linear-exact[:c1=..,c2=..,alpha=..] | "
                  "table[:f=path,g=path]");
  cmd->add_option("--sigma", flags.sigma, "noise amplitude");
  cmd->add_option("--seed", flags.seed, "master seed (echoed into outputs)");
  cmd->add_option("--trials", flags.trials, "number of Monte Carlo trials");
  cmd->add_option("--guard", flags.guard, "divergence guard on |Y|");
  cmd->add_option("--record", flags.record,
                  "what ensembles keep: auto | full | slices:t=..;x=.. | points:(x,t);(x,t)");
  cmd->add_option("--mask-level", flags.mask_level,
                  "also write mask.csv, the indicator of {ensemble mean >= level}");
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_option("--threads", flags.threads, "trial parallelism (0 = hardware)");
}

goursat::io::RunConfig resolve_config(const CommonFlags& flags) {
  goursat::io::RunConfig cfg;
  if (flags.config) cfg = goursat::io::parse_config_file(*flags.config);
  if (flags.grid) goursat::io::apply_grid_flag(cfg, *flags.grid);
  if (flags.domain) goursat::io::apply_domain_flag(cfg, *flags.domain);
  if (flags.source) goursat::io::apply_source_flag(cfg, *flags.source);
  if (flags.bc) goursat::io::apply_bc_flag(cfg, *flags.bc);
  if (flags.record) goursat::io::apply_record_flag(cfg, *flags.record);
  if (flags.sigma) cfg.sigma = *flags.sigma;
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.trials) cfg.trials = *flags.trials;
  if (flags.guard) cfg.guard = *flags.guard;
  if (flags.mask_level) cfg.mask_level = *flags.mask_level;
  if (flags.threads) cfg.threads = *flags.threads;
  if (flags.out) cfg.out = *flags.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"goursat: marching solver and Monte Carlo toolkit for Y_xt = F(Y) + sigma W_xt "
               "on the quarter-plane"};
  app.set_version_flag("--version", goursat::version_string);
  app.require_subcommand(1);

  CommonFlags solve_flags, ensemble_flags, sheet_flags;
  auto* solve_cmd = app.add_subcommand("solve", "single run; writes field.csv + summary.json");
  add_common_flags(solve_cmd, solve_flags);
  auto* ensemble_cmd =
      app.add_subcommand("ensemble", "Monte Carlo statistics over independent trials");
  add_common_flags(ensemble_cmd, ensemble_flags);
  auto* sheet_cmd =
      app.add_subcommand("sheet", "Brownian-sheet sample paths (zero drift, zero boundaries)");
  add_common_flags(sheet_cmd, sheet_flags);

  goursat::io::ExactConfig exact_cfg;
  auto* exact_cmd = app.add_subcommand("exact", "reference-solution tables");
  exact_cmd->add_option("--family", exact_cfg.family, "linear-exact | kink | breather");
  exact_cmd->add_option("--c1", exact_cfg.c1, "linear-exact c1");
  exact_cmd->add_option("--c2", exact_cfg.c2, "linear-exact c2");
  exact_cmd->add_option("--alpha", exact_cfg.alpha, "linear-exact alpha");
  exact_cmd->add_option("--u", exact_cfg.u, "kink speed, |u| < 1");
  exact_cmd->add_option("--x0", exact_cfg.x0, "kink offset");
  exact_cmd->add_option("--sign", exact_cfg.sign, "kink sign, +1 or -1");
  exact_cmd->add_option("--omega", exact_cfg.omega, "breather frequency in (0,1)");
  exact_cmd->add_option("--xmin", exact_cfg.x_min);
  exact_cmd->add_option("--xmax", exact_cfg.x_max);
  exact_cmd->add_option("--tmin", exact_cfg.t_min);
  exact_cmd->add_option("--tmax", exact_cfg.t_max);
  exact_cmd->add_option("--nx", exact_cfg.n_x, "cells along x");
  exact_cmd->add_option("--nt", exact_cfg.n_t, "cells along t");
  exact_cmd->add_option("--out", exact_cfg.out, "output directory");

  goursat::io::PeaksConfig peaks_cfg;
  std::string peaks_axis = "t";
  auto* peaks_cmd = app.add_subcommand("peaks", "count peaks along a slice of a field CSV");
  peaks_cmd->add_option("--in", peaks_cfg.input, "field CSV")->required();
  peaks_cmd->add_option("--axis", peaks_axis, "t (fixed t, slice over x) or x");
  peaks_cmd->add_option("--coord", peaks_cfg.coordinate, "slice coordinate (snapped)");
  peaks_cmd->add_option("--prominence", peaks_cfg.prominence_fraction,
                        "prominence threshold as a fraction of the slice range");

  auto* validate_cmd = app.add_subcommand("validate", "run the built-in oracle checks");
  bool validate_perturb = false;
  validate_cmd
      ->add_flag("--perturb-marching", validate_perturb,
                 "negative control: inject a small error before the equivalence check")
      ->group("");  // hidden: test hook

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) return goursat::io::cmd_solve(resolve_config(solve_flags), std::cout);
    if (ensemble_cmd->parsed())
      return goursat::io::cmd_ensemble(resolve_config(ensemble_flags), std::cout);
    if (sheet_cmd->parsed()) return goursat::io::cmd_sheet(resolve_config(sheet_flags), std::cout);
    if (exact_cmd->parsed()) return goursat::io::cmd_exact(exact_cfg, std::cout);
    if (peaks_cmd->parsed()) {
      if (peaks_axis != "t" && peaks_axis != "x")
        throw std::runtime_error("--axis must be t or x");
      peaks_cfg.axis = peaks_axis[0];
      return goursat::io::cmd_peaks(peaks_cfg, std::cout);
    }
    if (validate_cmd->parsed())
      return goursat::io::cmd_validate(std::cout, {validate_perturb}) == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
