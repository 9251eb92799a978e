#include "hodc/bench.hpp"

#include <cstdio>
#include <fstream>
#include <random>

#include <json.hpp>

#include "hodc/hodc.hpp"

namespace hodc::bench {

using json = nlohmann::ordered_json;

const char* to_string(X0Policy p) {
  switch (p) {
    case X0Policy::zeros: return "zeros";
    case X0Policy::ones: return "ones";
    case X0Policy::random: return "random";
  }
  return "?";
}

const char* to_string(TraceFormat f) { return f == TraceFormat::csv ? "csv" : "json"; }

X0Policy parse_x0_policy(const std::string& s) {
  if (s == "zeros") return X0Policy::zeros;
  if (s == "ones") return X0Policy::ones;
  if (s == "random") return X0Policy::random;
  throw InputError("unknown x0_policy '" + s + "' (zeros, ones, random)");
}

TraceFormat parse_format(const std::string& s) {
  if (s == "csv") return TraceFormat::csv;
  if (s == "json") return TraceFormat::json;
  throw InputError("unknown format '" + s + "' (csv, json)");
}

SolverMode parse_mode(const std::string& s) {
  if (s == "fixed") return SolverMode::fixed;
  if (s == "adaptive") return SolverMode::adaptive;
  throw InputError("unknown mode '" + s + "' (fixed, adaptive)");
}

namespace {

// %.17g round-trips doubles exactly, which keeps trace files byte-stable.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

VectorX<double> initial_point(const RunSpec& spec) {
  switch (spec.x0_policy) {
    case X0Policy::zeros: return VectorX<double>::Zero(spec.n);
    case X0Policy::ones: return VectorX<double>::Ones(spec.n);
    case X0Policy::random: {
      std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ull);
      std::normal_distribution<double> normal(0.0, 1.0);
      VectorX<double> x(spec.n);
      for (Index i = 0; i < spec.n; ++i) x[i] = normal(rng);
      return x;
    }
  }
  throw InputError("bad x0_policy");
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open output file '" + path.string() + "'");
  return out;
}

json record_to_json(const IterationRecord<double>& r) {
  json j;
  j["k"] = r.k;
  j["F"] = r.F_value;
  j["step_norm"] = r.step_norm;
  j["residual_bound"] = r.residual_bound;
  j["M_p_used"] = r.M_p_used;
  j["M_q_used"] = r.M_q_used;
  j["doublings"] = r.doublings;
  j["inner_iters"] = r.inner_iterations;
  j["inner_status"] = r.inner_status ? to_string(*r.inner_status) : "-";
  return j;
}

void write_trace(const RunSpec& spec, const SolveOutcome<double>& outcome) {
  auto out = open_output(spec.output_path);
  if (spec.format == TraceFormat::csv) {
    out << "k,F,step_norm,residual_bound,M_p_used,M_q_used,doublings,inner_iters,inner_status\n";
    for (const auto& r : outcome.trace) {
      out << r.k << ',' << fmt(r.F_value) << ',' << fmt(r.step_norm) << ','
          << fmt(r.residual_bound) << ',' << fmt(r.M_p_used) << ',' << fmt(r.M_q_used) << ','
          << r.doublings << ',' << r.inner_iterations << ','
          << (r.inner_status ? to_string(*r.inner_status) : "-") << '\n';
    }
  } else {
    json j;
    j["problem"] = spec.problem_name;
    j["n"] = spec.n;
    j["seed"] = spec.seed;
    j["status"] = to_string(outcome.status);
    j["F_final"] = outcome.F_final;
    j["records"] = json::array();
    for (const auto& r : outcome.trace) j["records"].push_back(record_to_json(r));
    out << j.dump(2) << '\n';
  }
}

json rate_fit_to_json(const RateFitReport<double>& rep) {
  json j;
  j["fitted_exponent"] = rep.fitted_exponent ? json(*rep.fitted_exponent) : json();
  j["theoretical_exponent"] = rep.theoretical_exponent;
  j["regime"] = rep.regime ? json(to_string(*rep.regime)) : json();
  j["geometric_fit_r2"] = rep.geometric_fit_r2 ? json(*rep.geometric_fit_r2) : json();
  j["kl_r_estimate"] = rep.kl_r_estimate ? json(*rep.kl_r_estimate) : json();
  j["envelope_checked"] = rep.envelope_checked;
  j["envelope_satisfied"] = rep.envelope_satisfied;
  j["notes"] = rep.notes;
  return j;
}

int exit_code_for(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged_step:
    case SolveStatus::converged_residual: return kExitConverged;
    case SolveStatus::max_iters: return kExitMaxIters;
    case SolveStatus::inner_failure: return kExitInnerFailure;
  }
  return kExitInputError;
}

}  // namespace

void RunSpec::validate() const {
  bool known = false;
  for (const auto& name : builtin_problem_names()) known = known || name == problem_name;
  if (!known) {
    std::string names;
    for (const auto& s : builtin_problem_names()) names += (names.empty() ? "" : ", ") + s;
    throw InputError("unknown problem '" + problem_name + "' (known: " + names + ")");
  }
  if (n < 1) throw InputError("n must be >= 1");
  if (p < 1 || p > 3 || q < 1 || q > 3) throw InputError("p and q must be in {1, 2, 3}");
  if (max_outer < 1) throw InputError("max_outer must be >= 1");
  if (mode == SolverMode::fixed && (!(M_p > 0) || !(M_q > 0)))
    throw InputError("fixed mode needs M_p > 0 and M_q > 0");
  if (mode == SolverMode::adaptive && (!(M_p0 > 0) || !(M_q0 > 0) || !(gamma > 0)))
    throw InputError("adaptive mode needs M_p0, M_q0, gamma > 0");
  if (!(theta >= 0)) throw InputError("theta must be >= 0");
  if (output_path.empty()) throw InputError("output_path must be set");
}

RunSpec run_spec_from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InputError("config parse error: " + std::string(e.what()));
  }
  RunSpec spec;
  if (j.contains("problem_name")) spec.problem_name = j["problem_name"].get<std::string>();
  if (j.contains("n")) spec.n = j["n"].get<Index>();
  if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("p")) spec.p = j["p"].get<int>();
  if (j.contains("q")) spec.q = j["q"].get<int>();
  if (j.contains("mode")) spec.mode = parse_mode(j["mode"].get<std::string>());
  if (j.contains("M_p")) spec.M_p = j["M_p"].get<double>();
  if (j.contains("M_q")) spec.M_q = j["M_q"].get<double>();
  if (j.contains("M_p0")) spec.M_p0 = j["M_p0"].get<double>();
  if (j.contains("M_q0")) spec.M_q0 = j["M_q0"].get<double>();
  if (j.contains("gamma")) spec.gamma = j["gamma"].get<double>();
  if (j.contains("theta")) spec.theta = j["theta"].get<double>();
  if (j.contains("x0_policy")) spec.x0_policy = parse_x0_policy(j["x0_policy"].get<std::string>());
  if (j.contains("max_outer")) spec.max_outer = j["max_outer"].get<int>();
  if (j.contains("output_path"))
    spec.output_path = std::filesystem::path(j["output_path"].get<std::string>());
  if (j.contains("format")) spec.format = parse_format(j["format"].get<std::string>());
  return spec;
}

RunResult run_command(const RunSpec& spec) {
  spec.validate();

  const DcProblem<double> problem = builtin_problem<double>(spec.problem_name, spec.n, spec.seed);
  const VectorX<double> x0 = initial_point(spec);

  SolverConfig<double> config;
  config.params.p = spec.p;
  config.params.q = spec.q;
  config.params.theta = spec.theta;
  config.max_outer = spec.max_outer;
  config.mode = spec.mode;

  RunResult result;
  if (spec.mode == SolverMode::fixed) {
    config.params.M_p = spec.M_p;
    config.params.M_q = spec.M_q;
    result.outcome = run_hodc(problem, x0, config);
  } else {
    config.params.M_p = spec.M_p0;
    config.params.M_q = spec.M_q0;
    config.gamma = spec.gamma;
    config.M_p0 = spec.M_p0;
    config.M_q0 = spec.M_q0;
    result.outcome = run_ahodc(problem, x0, config);
  }

  write_trace(spec, result.outcome);
  result.trace_path = spec.output_path;

  // Companion audit report
  json audit;
  audit["summary"] = {{"problem", spec.problem_name},
                      {"n", spec.n},
                      {"seed", spec.seed},
                      {"p", spec.p},
                      {"q", spec.q},
                      {"mode", to_string(spec.mode)},
                      {"status", to_string(result.outcome.status)},
                      {"F_final", result.outcome.F_final},
                      {"iterations", result.outcome.trace.size() - 1},
                      {"warnings", result.outcome.warnings},
                      {"diagnostic", result.outcome.diagnostic}};

  const auto lpf = problem.f.lipschitz(spec.p);
  const auto lqg = problem.g.lipschitz(spec.q);
  if (lpf && lqg) {
    const auto descent = audit_descent(result.outcome.trace, config.params, *lpf, *lqg);
    json dj;
    dj["applicable"] = descent.applicable;
    dj["pass"] = descent.pass;
    dj["note"] = descent.note;
    dj["violations"] = json::array();
    for (const auto& [k, gap] : descent.violations) dj["violations"].push_back({k, gap});
    audit["descent_audit"] = dj;

    if (problem.known_lower_bound) {
      const auto sum = summability_check(result.outcome.trace, config.params, *lpf, *lqg,
                                         *problem.known_lower_bound);
      audit["summability"] = {
          {"lhs_sum", sum.lhs_sum}, {"rhs_cap", sum.rhs_cap}, {"pass", sum.pass},
          {"note", sum.note}};
    }
  } else {
    audit["descent_audit"] = nullptr;
  }

  if (result.outcome.trace.size() >= 10) {
    result.rate_fit = audit_rate(result.outcome.trace, config.params, lpf, lqg,
                                 problem.known_lower_bound);
    result.rate_fit_available = true;
    audit["rate_fit"] = rate_fit_to_json(result.rate_fit);
  } else {
    audit["rate_fit"] = nullptr;
  }

  result.audit_path = spec.output_path;
  result.audit_path += ".audit.json";
  {
    auto out = open_output(result.audit_path);
    out << audit.dump(2) << '\n';
  }

  result.exit_code = exit_code_for(result.outcome.status);
  return result;
}

int sweep_command(const std::vector<RunSpec>& grid,
                  const std::filesystem::path& summary_path) {
  if (grid.empty()) throw InputError("sweep: empty grid");
  const RunSpec& head = grid.front();
  for (const RunSpec& s : grid) {
    if (s.problem_name != head.problem_name || s.n != head.n || s.seed != head.seed ||
        s.x0_policy != head.x0_policy || s.max_outer != head.max_outer)
      throw InputError(
          "sweep: grid entries must differ only in (p, q, mode); problem, n, seed, "
          "x0_policy and max_outer have to match");
  }

  auto out = open_output(summary_path);
  out << "p,q,mode,iterations_to_tolerance,final_residual,fitted_exponent,"
         "theoretical_exponent\n";

  int worst = kExitConverged;
  for (size_t i = 0; i < grid.size(); ++i) {
    RunSpec spec = grid[i];
    std::filesystem::path entry = summary_path;
    entry.replace_extension();
    entry += "_p" + std::to_string(spec.p) + "q" + std::to_string(spec.q) + "_" +
             to_string(spec.mode) +
             (spec.format == TraceFormat::csv ? ".csv" : ".json");
    spec.output_path = entry;
    const RunResult r = run_command(spec);
    worst = std::max(worst, r.exit_code);

    const auto& trace = r.outcome.trace;
    out << spec.p << ',' << spec.q << ',' << to_string(spec.mode) << ','
        << trace.size() - 1 << ',' << fmt(trace.back().residual_bound) << ',';
    if (r.rate_fit_available && r.rate_fit.fitted_exponent)
      out << fmt(*r.rate_fit.fitted_exponent);
    else
      out << "nan";
    out << ',' << fmt(-2.0 * std::min(spec.p, spec.q) / (spec.p + spec.q + 2)) << '\n';
  }
  return worst;
}

}  // namespace hodc::bench
