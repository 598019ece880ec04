#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "psplit/diagnostics.hpp"
#include "psplit/problems.hpp"

namespace psplit {

// Fixed trace schema, one row per iteration:
//   k,phi_tilde,grad_norm_sq,res_dual,res_primal_max,eps_sum,dist_p0,step_norm,proj_gap
// Doubles are printed with "%.17g" so identical runs produce identical bytes.
extern const char* const kTraceHeader;

std::string trace_to_csv(const std::vector<IterationRecord>& trace);
void write_trace_csv(const std::string& path,
                     const std::vector<IterationRecord>& trace);
std::vector<IterationRecord> read_trace_csv(const std::string& path);

nlohmann::json problem_to_json(const ProblemInstance& prob);
// Rebuilds the instance from its generator parameters; when the file carries
// realized matrices they are checked against the rebuilt ones.
ProblemInstance problem_from_json(const nlohmann::json& j);

nlohmann::json audit_report_to_json(const AuditReport& rep);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

}  // namespace psplit
