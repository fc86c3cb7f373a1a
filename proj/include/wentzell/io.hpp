#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wentzell/state.hpp"

namespace wentzell {

/// Shortest round-trippable decimal rendering (%.17g).  All numeric artifact
/// output funnels through this so identical runs produce identical bytes.
std::string format_double(double x);

std::uint64_t fnv1a64(std::string_view s);
std::string to_hex(std::uint64_t v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Numeric rows from a CSV-ish file: comma or whitespace separated, blank
/// lines and '#' comments skipped.
std::vector<std::vector<double>> read_numeric_rows(const std::string& path);

/// State artifact: one row per node, "block,index,value" with block in
/// {bulk, bdry}.  Reader and writer share the schema so states round-trip.
void write_state_csv(const std::string& path, const Grid& g, const StatePair& u);
StatePair read_state_csv(const std::string& path, const Grid& g);

/// Control artifact: one row per (step, bulk cell), "step,time,cell,value".
void write_control_csv(const std::string& path, const Grid& g, const SpaceTimeField& v);

struct RunRecord {
  double eps = 0;
  double cost = 0;
  double target_gap = 0;
  int iterations = 0;
  double bound = 0;
  bool bound_overflow = false;
  double kappa = 0;
  double wall_ms = 0;  // kept out of the CSV artifacts, reported in JSONL only
};

void write_records_csv(const std::string& path, const std::vector<RunRecord>& records);
void write_records_jsonl(const std::string& path, const std::vector<RunRecord>& records);

/// Overlay data for cost-versus-bound plots: rows (1/eps, ln cost, ln bound,
/// overflow flag).  Requires records with positive costs.
void emit_plotdata(const std::string& path, const std::vector<RunRecord>& records);

}  // namespace wentzell
