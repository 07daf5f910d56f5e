#include "doe/cli_commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <vector>

#include "doe/errors.hpp"
#include "doe/lace.hpp"
#include "doe/lp.hpp"
#include "doe/nlp.hpp"
#include "doe/report.hpp"
#include "doe/series.hpp"

namespace doe {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> expand_engines(const std::string& engine) {
  if (engine == "all") return {"lace", "lp", "nlp"};
  std::vector<std::string> out;
  std::istringstream in(engine);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok != "lace" && tok != "lp" && tok != "nlp") {
      throw ValidationError("unknown engine \"" + tok + "\" (expected lace, lp, nlp or all)");
    }
    out.push_back(tok);
  }
  if (out.empty()) throw ValidationError("no engine selected");
  return out;
}

std::vector<DoeCase> expand_cases(const std::string& doe_case) {
  if (doe_case == "both") return {DoeCase::Export, DoeCase::Import};
  if (doe_case == "import") return {DoeCase::Import};
  if (doe_case == "export") return {DoeCase::Export};
  throw ValidationError("unknown case \"" + doe_case + "\" (expected import, export or both)");
}

DoeResult dispatch(const Feeder& f, const std::string& engine, DoeCase c, double tolerance) {
  if (engine == "nlp") {
    NlpOptions opt;
    opt.feasibility_rel = tolerance;
    return run_nlp_doe(f, c, opt);
  }
  return run_engine(f, engine, c);
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream o(tmp);
    if (!o) throw ValidationError("cannot write to " + tmp.string());
    o << text;
  }
  fs::rename(tmp, target);
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const PreViolationError*>(&e)) return kExitPreViolation;
  if (dynamic_cast<const SolverFailure*>(&e)) return kExitSolverFailure;
  return kExitValidation;
}

std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& ch : out) {
    if (ch == ':' || ch == '/' || ch == '\\' || ch == ' ') ch = '-';
  }
  return out;
}

}  // namespace

int cmd_doe(const DoeCmdOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const Feeder f = load_feeder_file(opt.feeder_path);
    std::vector<DoeResult> results;
    for (const auto& engine : expand_engines(opt.engine)) {
      for (DoeCase c : expand_cases(opt.doe_case)) {
        results.push_back(dispatch(f, engine, c, opt.tolerance));
      }
    }
    std::string text;
    if (opt.format == "json") text = render_json(f, results, opt.feeder_path);
    else if (opt.format == "table") text = render_table(f, results);
    else if (opt.format == "csv") text = render_csv(f, results);
    else throw ValidationError("unknown format \"" + opt.format + "\"");
    write_text(opt.output_path, text, out);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "doe: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cmd_batch(const BatchCmdOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<std::string> engines;
  std::vector<DoeCase> cases;
  Feeder base;
  SnapshotSeries series;
  try {
    engines = expand_engines(opt.engine);
    cases = expand_cases(opt.doe_case);
    base = load_feeder_file(opt.feeder_path);
    series = load_series_csv(opt.series_path, base);
    fs::create_directories(opt.out_dir);
  } catch (const std::exception& e) {
    err << "batch: " << e.what() << "\n";
    return exit_code_for(e);
  }
  for (const auto& w : series.warnings) err << "batch: warning: " << w << "\n";

  struct StepOutcome {
    std::vector<DoeResult> results;
    int worst_exit = kExitOk;
  };
  const int steps = static_cast<int>(series.steps.size());
  std::vector<StepOutcome> outcomes(steps);

  auto run_step = [&](int idx) {
    const Snapshot& snap = series.steps[idx];
    Feeder f = base;
    f.base_load_p = snap.p;
    f.base_load_q = snap.q;
    StepOutcome& o = outcomes[idx];
    for (const auto& engine : engines) {
      for (DoeCase c : cases) {
        try {
          o.results.push_back(dispatch(f, engine, c, opt.tolerance));
        } catch (const PreViolationError& e) {
          DoeResult blank;
          blank.engine = engine;
          blank.doe_case = c;
          blank.envelopes = Eigen::VectorXd::Zero(f.node_count);
          blank.status = std::string("pre-violation: ") + e.quantity();
          o.results.push_back(std::move(blank));
          o.worst_exit = std::max(o.worst_exit, kExitPreViolation);
        } catch (const std::exception& e) {
          DoeResult blank;
          blank.engine = engine;
          blank.doe_case = c;
          blank.envelopes = Eigen::VectorXd::Zero(f.node_count);
          blank.status = std::string("failed: ") + e.what();
          o.results.push_back(std::move(blank));
          o.worst_exit = std::max(o.worst_exit, kExitSolverFailure);
        }
      }
    }
    const std::string doc = render_json(f, o.results, opt.feeder_path + "@" + snap.timestamp);
    const fs::path target = fs::path(opt.out_dir) / (sanitize(snap.timestamp) + ".json");
    const fs::path tmp = target.string() + ".tmp";
    std::ofstream file(tmp);
    file << doc;
    file.close();
    fs::rename(tmp, target);
  };

  int jobs = opt.jobs > 0 ? opt.jobs : static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min(jobs, steps));
  if (jobs == 1) {
    for (int i = 0; i < steps; ++i) run_step(i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t) {
      pool.emplace_back([&, t] {
        for (int i = t; i < steps; i += jobs) run_step(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::string summary = "timestamp,engine,case,combined_kw,binding,status\n";
  int ok_count = 0;
  int worst = kExitOk;
  for (int i = 0; i < steps; ++i) {
    const StepOutcome& o = outcomes[i];
    worst = std::max(worst, o.worst_exit);
    for (const auto& r : o.results) {
      char num[32];
      std::snprintf(num, sizeof num, "%.1f", r.combined_kw());
      std::string binding;
      for (const auto& b : r.binding) {
        if (!binding.empty()) binding += ";";
        binding += b.tag();
      }
      summary += series.steps[i].timestamp + "," + r.engine + "," + to_string(r.doe_case) +
                 "," + num + "," + (binding.empty() ? "none" : binding) + "," + r.status + "\n";
      if (r.status == "ok") ++ok_count;
    }
  }
  const fs::path summary_path = fs::path(opt.out_dir) / "summary.csv";
  std::ofstream file(summary_path);
  file << summary;
  out << "batch: " << steps << " steps, " << ok_count << " ok results, summary at "
      << summary_path.string() << "\n";
  return ok_count > 0 ? kExitOk : (worst == kExitOk ? kExitValidation : worst);
}

int cmd_gen(const GenCmdOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const Feeder f = generate_feeder(opt.spec);
    write_text(opt.output_path, feeder_to_json(f), out);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "gen: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cmd_bench(const BenchCmdOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    std::vector<std::string> engines;
    std::istringstream in(opt.engines);
    std::string tok;
    while (std::getline(in, tok, ',')) engines.push_back(tok);
    for (const auto& e : engines) {
      if (e != "lace" && e != "lp" && e != "nlp") {
        throw ValidationError("unknown engine \"" + e + "\" in --engines");
      }
    }
    BenchReport report;
    if (!opt.feeder_path.empty()) {
      const Feeder f = load_feeder_file(opt.feeder_path);
      report = run_benchmark(f, fs::path(opt.feeder_path).filename().string(), engines,
                             opt.repetitions);
    } else {
      if (opt.nodes_from < 1 || opt.nodes_to < opt.nodes_from || opt.nodes_step < 1) {
        throw ValidationError("bench size sweep needs 1 <= from <= to and step >= 1");
      }
      std::vector<FeederSpec> specs;
      for (int n = opt.nodes_from; n <= opt.nodes_to; n += opt.nodes_step) {
        FeederSpec spec;
        spec.node_count = n;
        if (opt.topology == "tree") spec.topology = TopologyKind::Tree;
        else if (opt.topology != "chain") throw ValidationError("unknown topology \"" + opt.topology + "\"");
        spec.seed = opt.seed + static_cast<std::uint64_t>(n);
        specs.push_back(spec);
      }
      report = run_benchmark(specs, engines, opt.repetitions);
    }
    write_text(opt.output_path, bench_to_csv(report), out);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "bench: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cmd_validate(const std::string& feeder_path, std::ostream& out, std::ostream& err) {
  try {
    std::ifstream in(feeder_path);
    if (!in) throw ValidationError("cannot open feeder file: " + feeder_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const Feeder f = parse_feeder(buf.str());
    const TopologyReport rep = validate_radial(f);
    out << render_topology_report(rep);
    return rep.ok() ? kExitOk : kExitValidation;
  } catch (const std::exception& e) {
    err << "validate: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace doe
