#include "doe/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "json.hpp"

namespace doe {

namespace {

std::string fmt(double v, int decimals) {
  if (std::isnan(v)) return "nan";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string binding_list(const DoeResult& r) {
  std::string out;
  for (const auto& b : r.binding) {
    if (!out.empty()) out += ",";
    out += b.tag();
  }
  return out.empty() ? "none" : out;
}

double round_to(double v, int decimals) {
  const double s = std::pow(10.0, decimals);
  return std::round(v * s) / s;
}

}  // namespace

std::string render_json(const Feeder& f, const std::vector<DoeResult>& results,
                        const std::string& feeder_name) {
  nlohmann::json doc;
  doc["feeder"] = feeder_name;
  doc["node_ids"] = f.node_labels;
  nlohmann::json engines = nlohmann::json::object();
  for (const auto& r : results) {
    nlohmann::json jr;
    std::vector<double> env(r.envelopes.size());
    for (int i = 0; i < r.envelopes.size(); ++i) env[i] = r.envelopes[i] / 1e3;
    jr["envelopes_kw"] = env;
    jr["combined_kw"] = r.combined_kw();
    std::vector<std::string> tags;
    for (const auto& b : r.binding) tags.push_back(b.tag());
    jr["binding"] = tags;
    jr["v_min_pu"] = round_to(r.v_min_pu, 3);
    jr["v_max_pu"] = round_to(r.v_max_pu, 3);
    jr["s01_kva"] = round_to(r.s01_kva, 1);
    jr["status"] = r.status;
    jr["iterations"] = r.iterations;
    if (r.engine == "lp") jr["degenerate"] = r.degenerate;
    jr["ac_check"] = {{"converged", r.ac_converged},
                      {"v_min_pu", round_to(r.ac_v_min_pu, 3)},
                      {"v_max_pu", round_to(r.ac_v_max_pu, 3)},
                      {"s01_kva", round_to(r.ac_s01_kva, 1)}};
    engines[r.engine][to_string(r.doe_case)] = std::move(jr);
  }
  doc["results"] = std::move(engines);
  return doc.dump(2) + "\n";
}

std::string render_table(const Feeder& f, const std::vector<DoeResult>& results) {
  // Paper-style rows: when an engine ran both cases, each cell shows
  // "export / import". Per-node columns are elided past ten nodes.
  std::map<std::string, std::pair<const DoeResult*, const DoeResult*>> by_engine;
  std::vector<std::string> order;
  for (const auto& r : results) {
    if (!by_engine.count(r.engine)) order.push_back(r.engine);
    auto& slot = by_engine[r.engine];
    (r.doe_case == DoeCase::Import ? slot.second : slot.first) = &r;
  }

  const int n = f.node_count;
  const bool per_node = n <= 10;

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head{"engine"};
  if (per_node) {
    for (int m = 1; m <= n; ++m) {
      head.push_back("p_" + std::to_string(f.node_labels[m - 1]) + " (kW)");
    }
  }
  head.insert(head.end(), {"combined (kW)", "V extreme (pu)", "S01 (kVA)", "binding"});

  for (const auto& engine : order) {
    const auto [exp, imp] = by_engine[engine];
    std::vector<std::string> row;
    const DoeResult* any = imp ? imp : exp;
    row.push_back(engine + (any->degenerate || (exp && exp->degenerate) ? " *" : ""));
    auto pair_cell = [&](double ev, double iv, int dec) {
      if (exp && imp) return fmt(ev, dec) + " / " + fmt(iv, dec);
      return exp ? fmt(ev, dec) : fmt(iv, dec);
    };
    if (per_node) {
      for (int m = 0; m < n; ++m) {
        row.push_back(pair_cell(exp ? exp->envelopes[m] / 1e3 : 0, imp ? imp->envelopes[m] / 1e3 : 0, 1));
      }
    }
    row.push_back(pair_cell(exp ? exp->combined_kw() : 0, imp ? imp->combined_kw() : 0, 1));
    // Exports push voltages up, imports pull them down; show each case's
    // worst side.
    row.push_back(pair_cell(exp ? exp->v_max_pu : 0, imp ? imp->v_min_pu : 0, 3));
    row.push_back(pair_cell(exp ? exp->s01_kva : 0, imp ? imp->s01_kva : 0, 1));
    std::string tags;
    if (exp) tags += binding_list(*exp);
    if (exp && imp) tags += " / ";
    if (imp) tags += binding_list(*imp);
    row.push_back(tags);
    rows.push_back(std::move(row));
  }

  std::vector<size_t> width(head.size());
  for (size_t c = 0; c < head.size(); ++c) width[c] = head[c].size();
  for (const auto& row : rows) {
    for (size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (size_t c = 0; c < row.size(); ++c) {
      out += row[c];
      if (c + 1 < row.size()) out.append(width[c] - row[c].size() + 2, ' ');
    }
    out += "\n";
  };
  emit(head);
  for (const auto& row : rows) emit(row);
  if (std::any_of(results.begin(), results.end(), [](const DoeResult& r) { return r.degenerate; })) {
    out += "* alternative optimal allocations exist; combined transfer is unique\n";
  }
  return out;
}

std::string render_csv(const Feeder& f, const std::vector<DoeResult>& results) {
  std::string out =
      "engine,case,combined_kw,v_min_pu,v_max_pu,s01_kva,degenerate,binding,envelopes_kw\n";
  for (const auto& r : results) {
    out += r.engine;
    out += ",";
    out += to_string(r.doe_case);
    out += "," + fmt(r.combined_kw(), 1);
    out += "," + fmt(r.v_min_pu, 3);
    out += "," + fmt(r.v_max_pu, 3);
    out += "," + fmt(r.s01_kva, 1);
    out += r.degenerate ? ",1" : ",0";
    out += "," + binding_list(r);
    out += ",";
    for (int m = 0; m < f.node_count; ++m) {
      if (m) out += ";";
      out += fmt(r.envelopes[m] / 1e3, 1);
    }
    out += "\n";
  }
  return out;
}

std::string render_topology_report(const TopologyReport& rep) {
  std::string out;
  out += "nodes:           " + std::to_string(rep.node_count) + "\n";
  out += "lines:           " + std::to_string(rep.line_count) + "\n";
  out += std::string("connected:       ") + (rep.connected ? "yes" : "no") + "\n";
  out += std::string("radial:          ") + (rep.is_tree ? "yes" : "no") + "\n";
  out += "slack-adjacent:  " + std::to_string(rep.slack_adjacent_count) + "\n";
  out += "lateral splits:  " + std::to_string(rep.lateral_count) + "\n";
  out += "max depth:       " + std::to_string(rep.max_depth) + "\n";
  if (rep.issues.empty()) {
    out += "status:          ok\n";
  } else {
    out += "status:          invalid\n";
    for (const auto& issue : rep.issues) out += "  - " + issue + "\n";
  }
  return out;
}

}  // namespace doe
