#include "doe/series.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "doe/errors.hpp"

namespace doe {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end && *end == '\0';
}

}  // namespace

SnapshotSeries parse_series_csv(const std::string& content, const Feeder& f) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("series csv: empty document");
  {
    const auto header = split_csv(line);
    if (header.size() != 4 || header[0] != "timestamp" || header[1] != "node_id" ||
        header[2] != "p_kw" || header[3] != "q_kvar") {
      throw ValidationError("series csv: header must be timestamp,node_id,p_kw,q_kvar");
    }
  }

  std::map<std::int64_t, int> node_of_label;
  for (int m = 1; m <= f.node_count; ++m) node_of_label[f.node_labels[m - 1]] = m;

  SnapshotSeries series;
  struct Pending {
    std::string timestamp;
    Eigen::VectorXd p, q;
    std::vector<bool> seen;
    int count = 0;
  };
  Pending cur;
  auto flush = [&] {
    if (cur.timestamp.empty()) return;
    if (cur.count == f.node_count) {
      series.steps.push_back({cur.timestamp, cur.p, cur.q});
    } else {
      series.warnings.push_back("timestamp " + cur.timestamp + " covers " +
                                std::to_string(cur.count) + " of " +
                                std::to_string(f.node_count) + " nodes, dropped");
    }
    cur.timestamp.clear();
  };

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv(line);
    double node_raw, p_kw, q_kvar;
    if (fields.size() != 4 || !parse_double(fields[1], node_raw) ||
        !parse_double(fields[2], p_kw) || !parse_double(fields[3], q_kvar) ||
        fields[0].empty()) {
      series.warnings.push_back("line " + std::to_string(line_no) + ": malformed row skipped");
      continue;
    }
    const auto it = node_of_label.find(static_cast<std::int64_t>(node_raw));
    if (it == node_of_label.end() || node_raw != static_cast<std::int64_t>(node_raw)) {
      series.warnings.push_back("line " + std::to_string(line_no) + ": unknown node_id " +
                                fields[1] + ", row skipped");
      continue;
    }
    if (fields[0] != cur.timestamp) {
      flush();
      cur.timestamp = fields[0];
      cur.p = Eigen::VectorXd::Zero(f.node_count);
      cur.q = Eigen::VectorXd::Zero(f.node_count);
      cur.seen.assign(f.node_count, false);
      cur.count = 0;
    }
    const int m = it->second;
    if (cur.seen[m - 1]) {
      series.warnings.push_back("line " + std::to_string(line_no) + ": duplicate node " +
                                fields[1] + " at " + fields[0] + ", row skipped");
      continue;
    }
    cur.seen[m - 1] = true;
    ++cur.count;
    cur.p[m - 1] = p_kw * 1e3;
    cur.q[m - 1] = q_kvar * 1e3;
  }
  flush();

  if (series.steps.empty()) {
    throw ValidationError("series csv: no complete timestamp survived parsing");
  }
  return series;
}

SnapshotSeries load_series_csv(const std::string& path, const Feeder& f) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open series file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_series_csv(buf.str(), f);
}

}  // namespace doe
