#pragma once

#include <string>
#include <vector>

#include "doe/doe_result.hpp"
#include "doe/feeder.hpp"

namespace doe {

// Rendering precision everywhere: kW and kVA one decimal, per-unit voltages
// three decimals, so text output diffs cleanly against golden files.

// Machine-readable document: engines x cases with per-node envelopes (full
// precision), combined kW, binding tags, verification voltages and head
// apparent power, plus the full-model cross-check block.
std::string render_json(const Feeder& f, const std::vector<DoeResult>& results,
                        const std::string& feeder_name);

// Human table, one row per engine/case.
std::string render_table(const Feeder& f, const std::vector<DoeResult>& results);

// Flat CSV, one row per engine/case.
std::string render_csv(const Feeder& f, const std::vector<DoeResult>& results);

std::string render_topology_report(const TopologyReport& report);

}  // namespace doe
