#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "doe/cli_commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Dynamic operating envelope toolkit for radial LV feeders"};
  app.require_subcommand(1);

  doe::DoeCmdOptions doe_opt;
  auto* doe_cmd = app.add_subcommand("doe", "Compute envelopes for a feeder snapshot");
  doe_cmd->add_option("feeder", doe_opt.feeder_path, "Feeder JSON file")->required();
  doe_cmd->add_option("--engine", doe_opt.engine, "lace, lp, nlp, a comma list, or all");
  doe_cmd->add_option("--case", doe_opt.doe_case, "import, export or both");
  doe_cmd->add_option("--format", doe_opt.format, "table, json or csv");
  doe_cmd->add_option("-o,--output", doe_opt.output_path, "Write result to file");
  doe_cmd->add_option("--tolerance", doe_opt.tolerance, "nlp feasibility tolerance (relative)");

  doe::BatchCmdOptions batch_opt;
  auto* batch_cmd = app.add_subcommand("batch", "Compute envelopes for every step of a load series");
  batch_cmd->add_option("feeder", batch_opt.feeder_path, "Feeder JSON file")->required();
  batch_cmd->add_option("series", batch_opt.series_path, "Series CSV (timestamp,node_id,p_kw,q_kvar)")
      ->required();
  batch_cmd->add_option("--engine", batch_opt.engine, "lace, lp, nlp, a comma list, or all");
  batch_cmd->add_option("--case", batch_opt.doe_case, "import, export or both");
  batch_cmd->add_option("--out-dir", batch_opt.out_dir, "Directory for per-step JSON and summary.csv");
  batch_cmd->add_option("--jobs", batch_opt.jobs, "Worker threads (default: hardware)");
  batch_cmd->add_option("--tolerance", batch_opt.tolerance, "nlp feasibility tolerance (relative)");

  doe::GenCmdOptions gen_opt;
  std::string gen_topology = "chain";
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic feeder");
  gen_cmd->add_option("--nodes", gen_opt.spec.node_count, "Customer node count");
  gen_cmd->add_option("--topology", gen_topology, "chain or tree");
  gen_cmd->add_option("--branching", gen_opt.spec.branching, "Tree: mean children per node");
  gen_cmd->add_option("--seed", gen_opt.spec.seed, "RNG seed");
  gen_cmd->add_option("--r-min", gen_opt.spec.r_min_ohm, "Segment resistance lower bound (ohm)");
  gen_cmd->add_option("--r-max", gen_opt.spec.r_max_ohm, "Segment resistance upper bound (ohm)");
  gen_cmd->add_option("--x-over-r", gen_opt.spec.x_over_r, "Reactance to resistance ratio");
  gen_cmd->add_option("--load-min", gen_opt.spec.load_p_min_kw, "Node load lower bound (kW)");
  gen_cmd->add_option("--load-max", gen_opt.spec.load_p_max_kw, "Node load upper bound (kW)");
  gen_cmd->add_option("--q-over-p", gen_opt.spec.q_over_p, "Reactive share of node load");
  gen_cmd->add_option("--margin", gen_opt.spec.transformer_margin,
                      "Transformer rating as multiple of base apparent load");
  gen_cmd->add_option("--kva", gen_opt.spec.fixed_transformer_kva,
                      "Fixed transformer rating (kVA), overrides --margin");
  gen_cmd->add_option("--band-use", gen_opt.spec.voltage_band_use,
                      "Base-load share of the voltage-drop band");
  gen_cmd->add_option("-o,--output", gen_opt.output_path, "Write feeder JSON to file");

  doe::BenchCmdOptions bench_opt;
  auto* bench_cmd = app.add_subcommand("bench", "Time the engines over a feeder-size sweep");
  bench_cmd->add_option("--from", bench_opt.nodes_from, "Smallest node count");
  bench_cmd->add_option("--to", bench_opt.nodes_to, "Largest node count");
  bench_cmd->add_option("--step", bench_opt.nodes_step, "Node count increment");
  bench_cmd->add_option("--topology", bench_opt.topology, "chain or tree");
  bench_cmd->add_option("--engines", bench_opt.engines, "Comma list of engines to time");
  bench_cmd->add_option("--reps", bench_opt.repetitions, "Repetitions per cell (median kept)");
  bench_cmd->add_option("--seed", bench_opt.seed, "Base RNG seed");
  bench_cmd->add_option("--feeder", bench_opt.feeder_path, "Bench an existing feeder file instead");
  bench_cmd->add_option("-o,--output", bench_opt.output_path, "Write CSV to file");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a feeder document and report topology");
  validate_cmd->add_option("feeder", validate_path, "Feeder JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (doe_cmd->parsed()) return doe::cmd_doe(doe_opt, std::cout, std::cerr);
  if (batch_cmd->parsed()) return doe::cmd_batch(batch_opt, std::cout, std::cerr);
  if (gen_cmd->parsed()) {
    if (gen_topology == "tree") gen_opt.spec.topology = doe::TopologyKind::Tree;
    else if (gen_topology != "chain") {
      std::cerr << "gen: unknown topology \"" << gen_topology << "\"\n";
      return doe::kExitValidation;
    }
    return doe::cmd_gen(gen_opt, std::cout, std::cerr);
  }
  if (bench_cmd->parsed()) return doe::cmd_bench(bench_opt, std::cout, std::cerr);
  if (validate_cmd->parsed()) return doe::cmd_validate(validate_path, std::cout, std::cerr);
  return doe::kExitValidation;
}
