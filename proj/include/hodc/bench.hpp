#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hodc/diagnostics.hpp"
#include "hodc/solver.hpp"

namespace hodc::bench {

enum class X0Policy { zeros, ones, random };
enum class TraceFormat { csv, json };

const char* to_string(X0Policy p);
const char* to_string(TraceFormat f);

X0Policy parse_x0_policy(const std::string& s);
TraceFormat parse_format(const std::string& s);
SolverMode parse_mode(const std::string& s);

/// One benchmark run: problem selection, solver setup, and output layout.
/// Mirrors the JSON config schema accepted by `--config`.
struct RunSpec {
  std::string problem_name = "quad_minus_quad";
  Index n = 10;
  std::uint64_t seed = 0;
  int p = 1;
  int q = 1;
  SolverMode mode = SolverMode::fixed;
  double M_p = 1.0;
  double M_q = 1.0;
  double M_p0 = 1.0;
  double M_q0 = 1.0;
  double gamma = 1.0;
  double theta = 0.1;
  X0Policy x0_policy = X0Policy::zeros;
  int max_outer = 500;
  std::filesystem::path output_path = "trace.csv";
  TraceFormat format = TraceFormat::csv;

  void validate() const;
};

RunSpec run_spec_from_json_file(const std::filesystem::path& path);

/// Exit codes shared by run_command / sweep_command and the CLI.
inline constexpr int kExitConverged = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitMaxIters = 2;
inline constexpr int kExitInnerFailure = 3;

struct RunResult {
  int exit_code = kExitConverged;
  SolveOutcome<double> outcome;
  RateFitReport<double> rate_fit;                 // only when the trace is long enough
  bool rate_fit_available = false;
  std::filesystem::path trace_path;
  std::filesystem::path audit_path;
};

/// Executes a spec, writes the trace file (CSV or JSON) at spec.output_path
/// and an audit JSON next to it, and returns the mapped exit code. Input
/// errors surface as exceptions; the CLI maps them to exit code 1.
RunResult run_command(const RunSpec& spec);

/// Runs a grid of specs that differ only in (p, q, mode) and writes a summary
/// CSV with one row per spec. Heterogeneous grids are an input error.
int sweep_command(const std::vector<RunSpec>& grid, const std::filesystem::path& summary_path);

}  // namespace hodc::bench
