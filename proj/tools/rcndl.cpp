#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rcndl/evidence.hpp"
#include "rcndl/oracle.hpp"
#include "rcndl/parser.hpp"
#include "rcndl/preprocessor.hpp"
#include "rcndl/report.hpp"
#include "rcndl/scheduler.hpp"

namespace {

constexpr int kConverged = 0;
constexpr int kInputError = 1;
constexpr int kNotConverged = 2;

struct RunFlags {
  std::string model;
  std::string evidence;
  std::optional<double> threshold;
  std::size_t max_passes = 100;
  std::string order = "greatest-gradient";
  bool dump = false;
  bool trace = false;
  bool json = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rcndl::Error(rcndl::ErrorKind::io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

rcndl::PreparedNetwork load_model(const std::string& path) {
  return rcndl::preprocess(rcndl::parse_program(read_file(path)));
}

int run(const RunFlags& f, bool with_oracle) {
  auto net = load_model(f.model);
  rcndl::EvidenceSet ev;
  ev.constraints = rcndl::parse_evidence(read_file(f.evidence));
  if (f.threshold) ev.default_threshold = *f.threshold;
  ev.max_passes = f.max_passes;
  ev.policy = f.order == "program" ? rcndl::OrderPolicy::program_order
                                   : rcndl::OrderPolicy::greatest_gradient;

  std::optional<std::string> intermediate;
  if (f.dump) intermediate = rcndl::render_intermediate(net);
  std::optional<rcndl::FullJoint> oracle;
  if (with_oracle) {
    rcndl::validate_evidence(net, ev);
    oracle = rcndl::oracle_mce(rcndl::expand_full_joint(net), ev.constraints);
  }
  auto [posterior, trace] = rcndl::run_reasoning(std::move(net), ev);

  rcndl::RunReport report{&posterior, &ev, &trace,
                          oracle ? &*oracle : nullptr, f.trace, intermediate};
  if (f.json) {
    std::cout << rcndl::render_json(report).dump(2) << "\n";
  } else {
    std::cout << rcndl::render_text(report);
  }
  return trace.converged ? kConverged : kNotConverged;
}

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("model", f.model, "RCNDL program")->required();
  cmd->add_option("evidence", f.evidence, "evidence file")->required();
  cmd->add_option("--threshold", f.threshold, "default gradient threshold")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--max-passes", f.max_passes, "pass limit");
  cmd->add_option("--order", f.order, "constraint order")
      ->check(CLI::IsMember({"greatest-gradient", "program"}));
  cmd->add_flag("--dump-intermediate", f.dump, "print the prepared clauses");
  cmd->add_flag("--trace", f.trace, "print every step");
  cmd->add_flag("--json", f.json, "machine-readable output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RCNDL interpreter"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "reason over a model with evidence");
  add_run_flags(run_cmd, run_flags);

  RunFlags oracle_flags;
  auto* oracle_cmd =
      app.add_subcommand("oracle", "compare the run with the full-joint solution");
  add_run_flags(oracle_cmd, oracle_flags);

  std::string check_model;
  bool check_json = false;
  auto* check_cmd = app.add_subcommand("check", "print the prepared clauses");
  check_cmd->add_option("model", check_model, "RCNDL program")->required();
  check_cmd->add_flag("--json", check_json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    if (*run_cmd) return run(run_flags, false);
    if (*oracle_cmd) return run(oracle_flags, true);
    const auto net = load_model(check_model);
    if (check_json) {
      nlohmann::json j = nlohmann::json::array();
      for (std::size_t i : net.clause_order()) {
        const auto& n = net.node(i);
        j.push_back({{"clause", n.label()},
                     {"table", std::vector<double>(n.table.probs().begin(),
                                                   n.table.probs().end())}});
      }
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << rcndl::render_intermediate(net);
    }
    return kConverged;
  } catch (const rcndl::Error& e) {
    std::cerr << "rcndl: " << rcndl::to_string(e.kind()) << ": " << e.what()
              << "\n";
    return e.kind() == rcndl::ErrorKind::non_convergence ? kNotConverged
                                                         : kInputError;
  } catch (const std::exception& e) {
    std::cerr << "rcndl: " << e.what() << "\n";
    return kInputError;
  }
}
