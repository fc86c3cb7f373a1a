#include "wentzell/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wentzell/errors.hpp"

namespace wentzell {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::config, "cannot open for writing: " + path);
  out << content;
  if (!out) fail(Errc::config, "write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::config, "cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\r') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

double parse_double(const std::string& tok, const std::string& path) {
  try {
    size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    fail(Errc::config, "not a number in " + path + ": '" + tok + "'");
  }
}

std::vector<std::vector<std::string>> read_field_rows(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    auto fields = split_fields(line);
    if (!fields.empty()) rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

std::vector<std::vector<double>> read_numeric_rows(const std::string& path) {
  std::vector<std::vector<double>> out;
  for (const auto& row : read_field_rows(path)) {
    std::vector<double> vals;
    vals.reserve(row.size());
    for (const auto& tok : row) vals.push_back(parse_double(tok, path));
    out.push_back(std::move(vals));
  }
  return out;
}

void write_state_csv(const std::string& path, const Grid& g, const StatePair& u) {
  check_shape(g, u, "state artifact");
  std::string body = "# state v1\n# block,index,value\n";
  for (int c = 0; c < g.n_bulk(); ++c) {
    body += "bulk," + std::to_string(c) + "," + format_double(u.bulk[c]) + "\n";
  }
  for (int i = 0; i < g.n_bdry(); ++i) {
    body += "bdry," + std::to_string(i) + "," + format_double(u.bdry[i]) + "\n";
  }
  write_text_file(path, body);
}

StatePair read_state_csv(const std::string& path, const Grid& g) {
  StatePair u = zero_state(g);
  Eigen::VectorXd seen_bulk = Eigen::VectorXd::Zero(g.n_bulk());
  Eigen::VectorXd seen_bdry = Eigen::VectorXd::Zero(g.n_bdry());
  for (const auto& row : read_field_rows(path)) {
    if (row.size() != 3) fail(Errc::config, "state row needs block,index,value in " + path);
    const long idx = std::lround(parse_double(row[1], path));
    const double val = parse_double(row[2], path);
    if (row[0] == "bulk") {
      if (idx < 0 || idx >= g.n_bulk()) fail(Errc::config, "bulk index out of range in " + path);
      u.bulk[idx] = val;
      seen_bulk[idx] = 1;
    } else if (row[0] == "bdry") {
      if (idx < 0 || idx >= g.n_bdry()) fail(Errc::config, "bdry index out of range in " + path);
      u.bdry[idx] = val;
      seen_bdry[idx] = 1;
    } else {
      fail(Errc::config, "unknown block '" + row[0] + "' in " + path);
    }
  }
  if (seen_bulk.sum() != g.n_bulk() || seen_bdry.sum() != g.n_bdry()) {
    fail(Errc::config, "state file does not cover every node: " + path);
  }
  return u;
}

void write_control_csv(const std::string& path, const Grid& g, const SpaceTimeField& v) {
  std::string body = "# control v1\n# step,time,cell,value\n";
  for (size_t n = 0; n < v.frames.size(); ++n) {
    if (v.frames[n].bulk.size() != g.n_bulk()) {
      fail(Errc::config, "control frame does not match the bulk node count");
    }
    const std::string head = std::to_string(n) + "," + format_double(v.times(n)) + ",";
    for (int c = 0; c < g.n_bulk(); ++c) {
      body += head + std::to_string(c) + "," + format_double(v.frames[n].bulk[c]) + "\n";
    }
  }
  write_text_file(path, body);
}

void write_records_csv(const std::string& path, const std::vector<RunRecord>& records) {
  std::string body = "# records v1\n# eps,cost,target_gap,iterations,bound,bound_overflow,kappa\n";
  for (const auto& r : records) {
    body += format_double(r.eps) + "," + format_double(r.cost) + "," + format_double(r.target_gap) +
            "," + std::to_string(r.iterations) + "," + format_double(r.bound) + "," +
            (r.bound_overflow ? "1" : "0") + "," + format_double(r.kappa) + "\n";
  }
  write_text_file(path, body);
}

void write_records_jsonl(const std::string& path, const std::vector<RunRecord>& records) {
  std::string body;
  for (const auto& r : records) {
    nlohmann::json j;
    j["eps"] = r.eps;
    j["cost"] = r.cost;
    j["target_gap"] = r.target_gap;
    j["iterations"] = r.iterations;
    j["bound"] = r.bound_overflow ? 0.0 : r.bound;  // JSON has no inf literal
    j["bound_overflow"] = r.bound_overflow;
    j["kappa"] = r.kappa;
    j["wall_ms"] = r.wall_ms;
    body += j.dump() + "\n";
  }
  write_text_file(path, body);
}

void emit_plotdata(const std::string& path, const std::vector<RunRecord>& records) {
  if (records.empty()) fail(Errc::config, "plot data needs at least one record");
  std::string body = "# plotdata v1\n# inv_eps,ln_cost,ln_bound,bound_overflow\n";
  for (const auto& r : records) {
    if (!(r.eps > 0.0) || !(r.cost > 0.0)) {
      fail(Errc::config, "plot data needs positive eps and cost");
    }
    const std::string ln_bound = r.bound_overflow ? "inf" : format_double(std::log(r.bound));
    body += format_double(1.0 / r.eps) + "," + format_double(std::log(r.cost)) + "," + ln_bound +
            "," + (r.bound_overflow ? "1" : "0") + "\n";
  }
  write_text_file(path, body);
}

}  // namespace wentzell
