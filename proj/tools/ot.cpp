// Command-line front end: reproducible runs over measure/plan files with
// machine-readable outputs. Exit codes: 0 ok, 2 validation/input error,
// 3 numerical non-convergence (partial output still written).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "otlab/io.hpp"
#include "otlab/one_dim.hpp"
#include "otlab/version.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;
using namespace otlab;

struct CostFlags {
  std::string cost = "euclidean";
  double norm_p = 3.0;
  double power = 1.0;
  double crystalline_eps = 0.0;

  CostSpec to_spec() const {
    CostSpec spec;
    if (cost == "euclidean") {
      spec.norm.kind = Norm::Euclidean;
    } else if (cost == "l1") {
      spec.norm.kind = Norm::L1;
    } else if (cost == "linf") {
      spec.norm.kind = Norm::Linf;
    } else if (cost == "pnorm") {
      spec.norm.kind = Norm::PNorm;
      spec.norm.p = norm_p;
    } else {
      throw ValidationError("bad_cost", "unknown cost family: " + cost);
    }
    spec.exponent = power;
    if (crystalline_eps > 0.0) spec.crystalline_eps = crystalline_eps;
    spec.validate();
    return spec;
  }
};

void add_cost_flags(CLI::App* cmd, CostFlags& flags) {
  cmd->add_option("--cost", flags.cost,
                  "cost norm family: euclidean, l1, linf, pnorm")
      ->default_val("euclidean");
  cmd->add_option("--pnorm-p", flags.norm_p, "exponent of the p-norm family");
  cmd->add_option("--pow", flags.power, "cost exponent applied to the norm")
      ->default_val(1.0);
  cmd->add_option("--crystalline-eps", flags.crystalline_eps,
                  "eps of the ternary crystalline cost (0 disables)");
}

struct GridFlags {
  std::vector<double> origin{0.0, 0.0};
  double cell = 0.0;
  int nx = 0;
  int ny = 0;

  bool given() const { return cell > 0.0 && nx > 0 && ny > 0; }
  GridSpec to_spec() const {
    GridSpec spec;
    spec.origin = {origin[0], origin[1]};
    spec.cell_size = cell;
    spec.nx = nx;
    spec.ny = ny;
    spec.validate();
    return spec;
  }
};

void add_grid_flags(CLI::App* cmd, GridFlags& flags) {
  cmd->add_option("--origin", flags.origin, "grid origin (two values)")
      ->expected(2);
  cmd->add_option("--cell", flags.cell, "grid cell size");
  cmd->add_option("--nx", flags.nx, "cells along x");
  cmd->add_option("--ny", flags.ny, "cells along y");
}

NormSpec parse_norm(const std::string& name) {
  if (name == "euclidean") return {Norm::Euclidean, 2.0};
  if (name == "l1") return {Norm::L1, 2.0};
  if (name == "linf") return {Norm::Linf, 2.0};
  throw ValidationError("bad_norm", "unknown norm: " + name);
}

struct Paths {
  std::string mu;
  std::string nu;
};

void add_measure_flags(CLI::App* cmd, Paths& paths) {
  cmd->add_option("--mu", paths.mu, "source measure JSON file")->required();
  cmd->add_option("--nu", paths.nu, "target measure JSON file")->required();
}

int run(int argc, char** argv) {
  CLI::App app{"discrete optimal transport laboratory"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "exact Kantorovich solve");
  Paths solve_paths;
  CostFlags solve_cost;
  std::string solve_out = "report.json";
  add_measure_flags(solve, solve_paths);
  add_cost_flags(solve, solve_cost);
  solve->add_option("-o,--out", solve_out, "output report file");

  // select
  auto* select = app.add_subcommand(
      "select", "singular-perturbation selection of a distinguished plan");
  Paths select_paths;
  std::string select_norm = "euclidean";
  std::vector<double> select_eps{0.5, 0.25, 0.125, 0.0625, 0.03125};
  bool elide_plans = false;
  std::string select_out = "selection.json";
  add_measure_flags(select, select_paths);
  select->add_option("--norm", select_norm, "euclidean, l1 or linf");
  select->add_option("--eps", select_eps, "decreasing eps schedule")
      ->delimiter(',');
  select->add_flag("--elide-plans", elide_plans,
                   "omit the per-eps plan list from the report");
  select->add_option("-o,--out", select_out, "output report file");

  // rearrange1d
  auto* rearrange = app.add_subcommand(
      "rearrange1d", "1-D increasing-rearrangement coupling");
  Paths rearrange_paths;
  std::string rearrange_out = "plan.json";
  add_measure_flags(rearrange, rearrange_paths);
  rearrange->add_option("-o,--out", rearrange_out, "output plan file");

  // certify
  auto* certify = app.add_subcommand(
      "certify", "cyclical-monotonicity and graph checks of a plan");
  Paths certify_paths;
  CostFlags certify_cost;
  std::string certify_plan;
  int max_cycle = 3;
  std::string certify_out = "certify.json";
  add_measure_flags(certify, certify_paths);
  add_cost_flags(certify, certify_cost);
  certify->add_option("--plan", certify_plan, "plan JSON file")->required();
  certify->add_option("--max-cycle", max_cycle, "maximum cycle length");
  certify->add_option("-o,--out", certify_out, "output report file");

  // density
  auto* density = app.add_subcommand(
      "density", "transport density of a plan on a grid");
  Paths density_paths;
  std::string density_plan;
  GridFlags density_grid;
  std::string density_out = "density";
  add_measure_flags(density, density_paths);
  density->add_option("--plan", density_plan, "plan JSON file")->required();
  add_grid_flags(density, density_grid);
  density->add_option("-o,--out", density_out,
                      "output prefix (.csv and .json are appended)");

  // pde
  auto* pde = app.add_subcommand(
      "pde", "p-Laplacian continuation toward the transport density");
  Paths pde_paths;
  GridFlags pde_grid;
  std::vector<double> p_schedule{4.0, 8.0, 16.0, 32.0, 64.0};
  int pde_cells = 64;
  int dump_every = 0;
  std::string pde_out = "";
  add_measure_flags(pde, pde_paths);
  add_grid_flags(pde, pde_grid);
  pde->add_option("--p", p_schedule, "increasing p schedule")->delimiter(',');
  pde->add_option("--cells", pde_cells,
                  "cells per side of the default auto-sized grid");
  pde->add_option("--dump-every", dump_every,
                  "write u at every k-th schedule level");
  pde->add_option("-o,--out", pde_out, "output prefix");

  // oracle
  auto* oracle = app.add_subcommand(
      "oracle", "exhaustive reference solvers for small instances");
  Paths oracle_paths;
  CostFlags oracle_cost;
  std::string oracle_kind = "primal";
  std::string oracle_norm = "euclidean";
  std::size_t oracle_guard = 64;
  std::string oracle_out = "oracle.json";
  add_measure_flags(oracle, oracle_paths);
  add_cost_flags(oracle, oracle_cost);
  oracle->add_option("--kind", oracle_kind, "primal or secondary");
  oracle->add_option("--norm", oracle_norm,
                     "norm for the secondary oracle");
  oracle->add_option("--max-support", oracle_guard,
                     "support guard of the secondary oracle");
  oracle->add_option("-o,--out", oracle_out, "output file");

  app.parse(argc, argv);

  if (solve->parsed()) {
    const DiscreteMeasure mu = read_measure_file(solve_paths.mu);
    const DiscreteMeasure nu = read_measure_file(solve_paths.nu);
    const SolveReport report = solve_kantorovich(mu, nu, solve_cost.to_spec());
    write_text_file(solve_out, to_json(report) + "\n");
    return 0;
  }
  if (select->parsed()) {
    const DiscreteMeasure mu = read_measure_file(select_paths.mu);
    const DiscreteMeasure nu = read_measure_file(select_paths.nu);
    const NormSpec norm = parse_norm(select_norm);
    const SelectionReport report =
        norm.kind == Norm::Euclidean
            ? select_monge_plan(mu, nu, norm, select_eps)
            : select_crystalline(mu, nu, norm, select_eps);
    write_text_file(select_out, to_json(report, !elide_plans) + "\n");
    return 0;
  }
  if (rearrange->parsed()) {
    const DiscreteMeasure mu = read_measure_file(rearrange_paths.mu);
    const DiscreteMeasure nu = read_measure_file(rearrange_paths.nu);
    write_text_file(rearrange_out,
                    to_json(monotone_rearrangement(mu, nu)) + "\n");
    return 0;
  }
  if (certify->parsed()) {
    const DiscreteMeasure mu = read_measure_file(certify_paths.mu);
    const DiscreteMeasure nu = read_measure_file(certify_paths.nu);
    const CostSpec spec = certify_cost.to_spec();
    const TransportPlan plan = read_plan_file(certify_plan, mu, nu);
    const MonotonicityReport mono =
        check_cyclical_monotonicity(plan, spec, max_cycle);
    const GraphReport graph = is_graph(plan);
    ordered_json j = ordered_json::parse(to_json(mono, plan));
    j["is_graph"] = graph.graph;
    j["split_mass"] = graph.split_mass;
    if (spec.norm.kind == Norm::Euclidean && spec.exponent == 2.0) {
      j["quadratic_monotone"] = check_quadratic_monotone_support(plan);
    }
    write_text_file(certify_out, j.dump() + "\n");
    return 0;
  }
  if (density->parsed()) {
    const DiscreteMeasure mu = read_measure_file(density_paths.mu);
    const DiscreteMeasure nu = read_measure_file(density_paths.nu);
    if (!density_grid.given()) {
      throw ValidationError("bad_grid",
                            "density needs --cell, --nx and --ny");
    }
    const TransportPlan plan = read_plan_file(density_plan, mu, nu);
    const TransportDensity sigma =
        transport_density_field(plan, density_grid.to_spec());
    if (sigma.outside > 0.0) {
      std::cerr << "warning: " << format_double(sigma.outside)
                << " transport mass lies outside the grid\n";
    }
    write_text_file(density_out + ".csv", grid_to_csv(sigma.field));
    write_text_file(density_out + ".json",
                    to_json(sigma.field, sigma.outside) + "\n");
    return 0;
  }
  if (pde->parsed()) {
    const DiscreteMeasure mu = read_measure_file(pde_paths.mu);
    const DiscreteMeasure nu = read_measure_file(pde_paths.nu);
    const GridSpec grid = pde_grid.given()
                              ? pde_grid.to_spec()
                              : default_grid_for(mu, nu, pde_cells);
    EGOptions options;
    int level = 0;
    if (dump_every > 0) {
      options.on_level = [&](double p, const GridField& u) {
        if (++level % dump_every == 0) {
          write_text_file(pde_out + "u_p" + format_double(p) + ".csv",
                          grid_to_csv(u));
        }
      };
    }
    try {
      const EGReport report =
          evans_gangbo_limit(mu, nu, grid, p_schedule, options);
      write_text_file(pde_out + "u.csv", grid_to_csv(report.u));
      write_text_file(pde_out + "a.csv", grid_to_csv(report.a));
      ordered_json j;
      j["p_final"] = report.p_final;
      j["residual"] = report.residual;
      j["grad_sup"] = report.grad_sup;
      j["eikonal_fraction"] = report.eikonal_fraction;
      j["grad_sup_schedule"] = report.grad_sup_schedule;
      write_text_file(pde_out + "report.json", j.dump() + "\n");
    } catch (const NonConvergence& nc) {
      // Still emit the best iterate so the run is inspectable.
      write_text_file(pde_out + "u.csv", grid_to_csv(nc.best));
      throw;
    }
    return 0;
  }
  if (oracle->parsed()) {
    const DiscreteMeasure mu = read_measure_file(oracle_paths.mu);
    const DiscreteMeasure nu = read_measure_file(oracle_paths.nu);
    ordered_json j;
    if (oracle_kind == "primal") {
      j["value"] = brute_force_optimum(mu, nu, oracle_cost.to_spec());
    } else if (oracle_kind == "secondary") {
      const SecondaryOracleResult res = exact_secondary_oracle(
          mu, nu, parse_norm(oracle_norm), oracle_guard);
      j["secondary_value"] = res.secondary_value;
      j["primary_value"] = res.primary_value;
      j["plan"] = ordered_json::parse(to_json(res.plan));
    } else {
      throw ValidationError("bad_kind", "oracle kind is primal or secondary");
    }
    write_text_file(oracle_out, j.dump() + "\n");
    return 0;
  }
  return 0;
}

void emit_error(const std::string& kind, const std::string& message) {
  ordered_json j;
  j["error"]["kind"] = kind;
  j["error"]["message"] = message;
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  const auto start = std::chrono::steady_clock::now();
  int code = 0;
  try {
    code = run(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help
    emit_error("validation", e.what());
    code = 2;
  } catch (const NonConvergence& e) {
    emit_error("nonconvergence", std::string(e.what()) +
                                     " (residual " + format_double(e.residual) +
                                     ")");
    code = 3;
  } catch (const IoError& e) {
    emit_error("io", e.what());
    code = 2;
  } catch (const BudgetExceeded& e) {
    emit_error("budget", e.what());
    code = 2;
  } catch (const ValidationError& e) {
    emit_error("validation", e.what());
    code = 2;
  } catch (const NumericError& e) {
    emit_error("numeric", e.what());
    code = 2;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    code = 2;
  }
  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                start)
          .count();
  ordered_json meta;
  meta["run_meta"]["version"] = otlab::kVersion;
  std::vector<std::string> flags(argv + 1, argv + argc);
  meta["run_meta"]["flags"] = flags;
  meta["run_meta"]["wall_ms"] = wall_ms;
  std::cerr << meta.dump() << "\n";
  return code;
}
