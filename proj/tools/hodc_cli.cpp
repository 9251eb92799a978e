#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hodc/bench.hpp"

namespace {

using hodc::bench::RunSpec;

struct SpecFlags {
  std::string problem, mode, x0, format, config, out;
  long long n = -1;
  unsigned long long seed = 0;
  int p = 0, q = 0, max_outer = 0;
  double mp = 0, mq = 0, mp0 = 0, mq0 = 0, gamma = 0, theta = -1;
};

void add_spec_flags(CLI::App* cmd, SpecFlags& f, bool with_pq) {
  cmd->add_option("--problem", f.problem, "builtin problem name");
  cmd->add_option("--n", f.n, "problem dimension");
  cmd->add_option("--seed", f.seed, "construction seed");
  if (with_pq) {
    cmd->add_option("--p", f.p, "Taylor degree for f");
    cmd->add_option("--q", f.q, "Taylor degree for g");
    cmd->add_option("--mode", f.mode, "fixed or adaptive");
  }
  cmd->add_option("--Mp", f.mp, "fixed-mode M_p");
  cmd->add_option("--Mq", f.mq, "fixed-mode M_q");
  cmd->add_option("--Mp0", f.mp0, "adaptive initial M_p");
  cmd->add_option("--Mq0", f.mq0, "adaptive initial M_q");
  cmd->add_option("--gamma", f.gamma, "adaptive descent constant");
  cmd->add_option("--theta", f.theta, "inner tolerance multiplier");
  cmd->add_option("--x0", f.x0, "start point policy: zeros, ones, random");
  cmd->add_option("--max-outer", f.max_outer, "outer iteration budget");
  cmd->add_option("--out", f.out, "output path");
  cmd->add_option("--format", f.format, "trace format: csv or json");
  cmd->add_option("--config", f.config, "JSON file mirroring the spec fields");
}

RunSpec build_spec(const CLI::App* cmd, const SpecFlags& f, bool with_pq) {
  RunSpec spec = f.config.empty() ? RunSpec{} : hodc::bench::run_spec_from_json_file(f.config);
  if (cmd->count("--problem")) spec.problem_name = f.problem;
  if (cmd->count("--n")) spec.n = static_cast<hodc::Index>(f.n);
  if (cmd->count("--seed")) spec.seed = f.seed;
  if (with_pq) {
    if (cmd->count("--p")) spec.p = f.p;
    if (cmd->count("--q")) spec.q = f.q;
    if (cmd->count("--mode")) spec.mode = hodc::bench::parse_mode(f.mode);
  }
  if (cmd->count("--Mp")) spec.M_p = f.mp;
  if (cmd->count("--Mq")) spec.M_q = f.mq;
  if (cmd->count("--Mp0")) spec.M_p0 = f.mp0;
  if (cmd->count("--Mq0")) spec.M_q0 = f.mq0;
  if (cmd->count("--gamma")) spec.gamma = f.gamma;
  if (cmd->count("--theta")) spec.theta = f.theta;
  if (cmd->count("--x0")) spec.x0_policy = hodc::bench::parse_x0_policy(f.x0);
  if (cmd->count("--max-outer")) spec.max_outer = f.max_outer;
  if (cmd->count("--out")) spec.output_path = f.out;
  if (cmd->count("--format")) spec.format = hodc::bench::parse_format(f.format);
  return spec;
}

int do_run(const CLI::App* cmd, const SpecFlags& flags) {
  const RunSpec spec = build_spec(cmd, flags, true);
  const auto result = hodc::bench::run_command(spec);
  for (const auto& w : result.outcome.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "status=" << hodc::to_string(result.outcome.status)
            << " iterations=" << result.outcome.trace.size() - 1
            << " F_final=" << result.outcome.F_final << " trace=" << result.trace_path.string()
            << " audit=" << result.audit_path.string() << '\n';
  if (!result.outcome.diagnostic.empty())
    std::cerr << "diagnostic: " << result.outcome.diagnostic << '\n';
  return result.exit_code;
}

int do_sweep(const CLI::App* cmd, SpecFlags flags, const std::vector<std::string>& pq_entries,
             const std::string& config) {
  flags.config.clear();  // for sweep, --config holds the grid schema, not a RunSpec
  std::vector<RunSpec> grid;
  if (!config.empty()) {
    // config file: {"specs": [RunSpec, ...]} with per-entry overrides applied on top
    std::ifstream in(config);
    if (!in) throw hodc::InputError("cannot open config file '" + config + "'");
    nlohmann::json j;
    in >> j;
    if (!j.contains("specs") || !j["specs"].is_array())
      throw hodc::InputError("sweep config needs a 'specs' array");
    for (const auto& e : j["specs"]) {
      // round-trip each entry through a temp file-free parse by reusing the field names
      RunSpec base = build_spec(cmd, flags, false);
      if (e.contains("problem_name")) base.problem_name = e["problem_name"].get<std::string>();
      if (e.contains("n")) base.n = e["n"].get<hodc::Index>();
      if (e.contains("seed")) base.seed = e["seed"].get<std::uint64_t>();
      if (e.contains("p")) base.p = e["p"].get<int>();
      if (e.contains("q")) base.q = e["q"].get<int>();
      if (e.contains("mode")) base.mode = hodc::bench::parse_mode(e["mode"].get<std::string>());
      if (e.contains("M_p")) base.M_p = e["M_p"].get<double>();
      if (e.contains("M_q")) base.M_q = e["M_q"].get<double>();
      if (e.contains("M_p0")) base.M_p0 = e["M_p0"].get<double>();
      if (e.contains("M_q0")) base.M_q0 = e["M_q0"].get<double>();
      if (e.contains("gamma")) base.gamma = e["gamma"].get<double>();
      if (e.contains("theta")) base.theta = e["theta"].get<double>();
      if (e.contains("x0_policy"))
        base.x0_policy = hodc::bench::parse_x0_policy(e["x0_policy"].get<std::string>());
      if (e.contains("max_outer")) base.max_outer = e["max_outer"].get<int>();
      grid.push_back(base);
    }
  } else {
    if (pq_entries.empty())
      throw hodc::InputError("sweep needs --pq entries (e.g. --pq 1,1 --pq 2,2) or --config");
    for (const auto& entry : pq_entries) {
      RunSpec spec = build_spec(cmd, flags, false);
      int p = 0, q = 0;
      char mode_buf[16] = "fixed";
      const int fields = std::sscanf(entry.c_str(), "%d,%d,%15s", &p, &q, mode_buf);
      if (fields < 2) throw hodc::InputError("bad --pq entry '" + entry + "' (want p,q[,mode])");
      spec.p = p;
      spec.q = q;
      spec.mode = hodc::bench::parse_mode(fields >= 3 ? mode_buf : "fixed");
      grid.push_back(spec);
    }
  }
  std::filesystem::path summary = cmd->count("--out") ? flags.out : std::string("sweep.csv");
  const int code = hodc::bench::sweep_command(grid, summary);
  std::cout << "sweep summary written to " << summary.string() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"higher-order difference-of-convex solver benchmark"};
  app.require_subcommand(1);

  SpecFlags run_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "solve one configured problem");
  add_spec_flags(run_cmd, run_flags, true);

  SpecFlags sweep_flags;
  std::vector<std::string> pq_entries;
  std::string sweep_config;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a (p,q,mode) grid and tabulate");
  add_spec_flags(sweep_cmd, sweep_flags, false);
  sweep_cmd->add_option("--pq", pq_entries, "grid entry p,q[,mode]; repeatable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return hodc::bench::kExitInputError;
  }

  try {
    if (run_cmd->parsed()) return do_run(run_cmd, run_flags);
    return do_sweep(sweep_cmd, sweep_flags, pq_entries, sweep_flags.config);
  } catch (const hodc::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return hodc::bench::kExitInputError;
  } catch (const hodc::CapabilityError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return hodc::bench::kExitInputError;
  } catch (const hodc::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return hodc::bench::kExitInnerFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return hodc::bench::kExitInputError;
  }
}
