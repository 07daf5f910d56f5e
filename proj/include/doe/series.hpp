#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "doe/feeder.hpp"

namespace doe {

// One complete set of node loads at a timestamp.
struct Snapshot {
  std::string timestamp;
  Eigen::VectorXd p;  // W, entry m-1 for node m
  Eigen::VectorXd q;  // var
};

struct SnapshotSeries {
  std::vector<Snapshot> steps;
  std::vector<std::string> warnings;  // skipped rows and incomplete timestamps
};

// Parses `timestamp,node_id,p_kw,q_kvar` rows against a feeder's node set.
// Rows that fail to parse or reference unknown nodes are skipped with a
// warning; a timestamp missing any node is dropped entirely. Throws
// ValidationError only when the header is wrong or nothing survives.
SnapshotSeries parse_series_csv(const std::string& content, const Feeder& f);
SnapshotSeries load_series_csv(const std::string& path, const Feeder& f);

}  // namespace doe
