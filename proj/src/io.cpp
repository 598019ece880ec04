#include "psplit/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace psplit {

const char* const kTraceHeader =
    "k,phi_tilde,grad_norm_sq,res_dual,res_primal_max,eps_sum,dist_p0,"
    "step_norm,proj_gap";

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Mat mat_from_json(const nlohmann::json& j) {
  if (j.empty()) return Mat(0, 0);
  Mat m(static_cast<Index>(j.size()), static_cast<Index>(j.at(0).size()));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c)
      m(r, c) = j.at(static_cast<size_t>(r)).at(static_cast<size_t>(c));
  return m;
}

nlohmann::json mat_to_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string trace_to_csv(const std::vector<IterationRecord>& trace) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const auto& r : trace) {
    out += std::to_string(r.k);
    out += ',';
    out += fmt(r.phi_tilde);
    out += ',';
    out += fmt(r.grad_norm_sq);
    out += ',';
    out += fmt(r.res_dual);
    out += ',';
    out += fmt(r.res_primal_max);
    out += ',';
    out += fmt(r.eps_sum);
    out += ',';
    out += fmt(r.dist_p0);
    out += ',';
    out += fmt(r.step_norm);
    out += ',';
    out += fmt(r.proj_gap);
    out += '\n';
  }
  return out;
}

void write_trace_csv(const std::string& path,
                     const std::vector<IterationRecord>& trace) {
  write_text_file(path, trace_to_csv(trace));
}

std::vector<IterationRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DimensionError("read_trace_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
    throw DimensionError("read_trace_csv: unexpected header in " + path);
  std::vector<IterationRecord> trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9)
      throw DimensionError("read_trace_csv: malformed row '" + line + "'");
    IterationRecord r;
    r.k = std::stoi(cells[0]);
    r.phi_tilde = std::stod(cells[1]);
    r.grad_norm_sq = std::stod(cells[2]);
    r.res_dual = std::stod(cells[3]);
    r.res_primal_max = std::stod(cells[4]);
    r.eps_sum = std::stod(cells[5]);
    r.dist_p0 = std::stod(cells[6]);
    r.step_norm = std::stod(cells[7]);
    r.proj_gap = std::stod(cells[8]);
    trace.push_back(r);
  }
  return trace;
}

nlohmann::json problem_to_json(const ProblemInstance& prob) {
  nlohmann::json j;
  j["schema"] = "psplit-problem/1";
  j["kind"] = prob.params.kind;
  j["params"] = {{"dim", prob.params.dim},
                 {"rows", prob.params.rows},
                 {"cols", prob.params.cols},
                 {"mu", prob.params.mu},
                 {"seed", prob.params.seed}};
  j["n"] = prob.n();
  nlohmann::json dims = nlohmann::json::array();
  for (int i = 0; i < prob.n(); ++i) dims.push_back(prob.family.block_dim(i));
  j["block_dims"] = std::move(dims);
  j["block_ops"] = prob.block_tags;
  nlohmann::json data;
  for (const auto& [name, m] : prob.data) data[name] = mat_to_json(m);
  j["data"] = std::move(data);
  return j;
}

ProblemInstance problem_from_json(const nlohmann::json& j) {
  if (j.value("schema", "") != "psplit-problem/1")
    throw DimensionError("problem_from_json: unknown schema");
  GenParams p;
  p.kind = j.at("kind").get<std::string>();
  const auto& jp = j.at("params");
  p.dim = jp.value("dim", 0);
  p.rows = jp.value("rows", 0);
  p.cols = jp.value("cols", 0);
  p.mu = jp.value("mu", 0.0);
  p.seed = jp.value("seed", std::uint64_t{0});
  ProblemInstance prob = make_problem(p);
  if (j.contains("data")) {
    for (const auto& [name, m] : prob.data) {
      if (!j["data"].contains(name)) continue;
      Mat stored = mat_from_json(j["data"][name]);
      if (stored.rows() != m.rows() || stored.cols() != m.cols() ||
          (stored - m).cwiseAbs().maxCoeff() > 1e-12)
        throw DimensionError(
            "problem_from_json: stored data for '" + name +
            "' does not match the instance rebuilt from its seed");
    }
  }
  return prob;
}

nlohmann::json audit_report_to_json(const AuditReport& rep) {
  nlohmann::json j;
  j["iterations"] = rep.iterations;
  j["omega"] = rep.omega;
  j["c"] = rep.c;
  j["clean"] = rep.clean();
  nlohmann::json flags = nlohmann::json::array();
  for (const auto& f : rep.flags)
    flags.push_back({{"kind", f.kind},
                     {"k", f.k},
                     {"value", f.value},
                     {"bound", f.bound}});
  j["flags"] = std::move(flags);
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DimensionError("write_text_file: cannot open " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DimensionError("read_text_file: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

nlohmann::json read_json_file(const std::string& path) {
  return nlohmann::json::parse(read_text_file(path));
}

}  // namespace psplit
