// Command-line front end: validate | optimize | simulate | reproduce-paper.
//
// Exit codes: 0 success, 1 validation failure, 2 infeasible, 3 I/O.

#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "ncndn/experiment.hpp"

using namespace ncndn;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kInfeasible = 2, kIo = 3 };

struct Args {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  double bandwidth_scale = 1.0;
  bool exact_bloom = false;
};

void add_common(CLI::App* cmd, Args& a, bool outputs) {
  cmd->add_option("--config", a.config, "experiment configuration (INI)")->required();
  if (!outputs) return;
  cmd->add_option("--seed", a.seed, "base seed (overrides sim.seed)");
  cmd->add_option("--out", a.out, "output directory")->capture_default_str();
  cmd->add_option("--bandwidth-scale", a.bandwidth_scale, "multiply every link bandwidth")
      ->capture_default_str();
  cmd->add_flag("--exact-bloom", a.exact_bloom, "back Bloom filters by exact id sets");
}

int cmd_validate(const config::ExperimentConfig& cfg) {
  bool ok = true;
  for (const auto& c : experiment::validate(cfg)) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) std::cout << ": " << c.detail;
    std::cout << '\n';
    ok = ok && c.pass;
  }
  return ok ? kOk : kInvalid;
}

void warn_costs(const config::ExperimentConfig& cfg) {
  for (const auto& v : optimizer::validate_costs(cfg.profile, cfg.costs)) {
    std::cerr << "warning: " << v.message << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network-coded NDN video streaming: rate allocation and simulation"};
  app.require_subcommand(1);
  Args args;
  auto* validate = app.add_subcommand("validate", "check a configuration and its topology");
  auto* optimize = app.add_subcommand("optimize", "compute the Interest rate allocation");
  auto* simulate = app.add_subcommand("simulate", "run the seeded simulation sweep");
  auto* reproduce =
      app.add_subcommand("reproduce-paper", "convergence traces, allocation and the full sweep");
  add_common(validate, args, false);
  for (auto* cmd : {optimize, simulate, reproduce}) add_common(cmd, args, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInvalid;
  }

  try {
    const auto cfg = config::load_config(args.config);
    if (validate->parsed()) return cmd_validate(cfg);

    warn_costs(cfg);
    experiment::RunOptions opt;
    opt.out = args.out;
    opt.seed = args.seed.value_or(cfg.seed);
    opt.bandwidth_scale = args.bandwidth_scale;
    opt.exact_bloom = args.exact_bloom;
    std::vector<std::filesystem::path> files;
    if (optimize->parsed()) files = experiment::cmd_optimize(cfg, opt);
    if (simulate->parsed()) files = experiment::cmd_simulate(cfg, opt);
    if (reproduce->parsed()) files = experiment::cmd_reproduce(cfg, opt);
    for (const auto& f : files) std::cout << f.string() << '\n';
    return kOk;
  } catch (const optimizer::Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const config::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const config::ConfigInvalid& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kInvalid;
  } catch (const CycleError& e) {
    std::cerr << "invalid topology: " << e.what() << '\n';
    return kInvalid;
  } catch (const MultiServerError& e) {
    std::cerr << "invalid topology: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInvalid;
  }
}
