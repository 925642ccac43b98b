#include "rcndl/report.hpp"

#include <cmath>

#include "rcndl/format.hpp"

namespace rcndl {

namespace {

std::string constraint_name(const EvidenceSet& ev, std::size_t k) {
  return describe(ev.constraints[k]);
}

}  // namespace

std::string render_trace_step(const TraceStep& step) {
  std::string out = "step " + std::to_string(step.step) + " (pass " +
                    std::to_string(step.pass) + "): " + step.label +
                    " gradient " + fixed6(step.gradient_before) + "; updated";
  for (std::size_t k = 0; k < step.touched.size(); ++k) {
    out += (k ? " | " : " ") + step.touched[k];
  }
  out += "\n ";
  for (const auto& [v, p] : step.marginals) {
    out += " P(" + v.name() + ") = " + fixed6(p);
  }
  return out + "\n";
}

std::string render_text(const RunReport& r) {
  const auto& net = *r.network;
  std::string out;
  if (r.intermediate) out += *r.intermediate + "\n";
  if (r.include_trace && r.trace) {
    for (const auto& s : r.trace->steps) out += render_trace_step(s);
    out += "\n";
  }
  for (const auto& v : net.variables()) {
    const double p = posterior_marginal(net, v).second;
    out += "P(" + v.name() + ") = " + fixed6(p);
    if (r.oracle) {
      const double q = joint_marginal(*r.oracle, v);
      out += "  oracle " + fixed6(q) + "  diff " + fixed6(std::abs(p - q));
    }
    out += "\n";
  }
  if (r.trace) {
    out += "passes: " + std::to_string(r.trace->pass_count) + "\n";
    out += std::string("converged: ") + (r.trace->converged ? "yes" : "no") +
           "\n";
    for (std::size_t k = 0; k < r.trace->final_gradients.size(); ++k) {
      out += "gradient " + constraint_name(*r.evidence, k) + " = " +
             fixed6(r.trace->final_gradients[k]) + "\n";
    }
  }
  return out;
}

nlohmann::json render_json(const RunReport& r) {
  const auto& net = *r.network;
  nlohmann::json j;
  auto& posterior = j["posterior"] = nlohmann::json::object();
  for (const auto& v : net.variables()) {
    nlohmann::json entry{{"p", posterior_marginal(net, v).second}};
    if (r.oracle) {
      entry["oracle"] = joint_marginal(*r.oracle, v);
      entry["diff"] = std::abs(entry["p"].get<double>() - entry["oracle"].get<double>());
    }
    posterior[v.name()] = entry;
  }
  if (r.intermediate) j["intermediate"] = *r.intermediate;
  if (r.trace) {
    j["passes"] = r.trace->pass_count;
    j["converged"] = r.trace->converged;
    auto& grads = j["gradients"] = nlohmann::json::array();
    for (std::size_t k = 0; k < r.trace->final_gradients.size(); ++k) {
      grads.push_back({{"constraint", constraint_name(*r.evidence, k)},
                       {"gradient", r.trace->final_gradients[k]}});
    }
    if (r.include_trace) {
      auto& steps = j["trace"] = nlohmann::json::array();
      for (const auto& s : r.trace->steps) {
        nlohmann::json m = nlohmann::json::object();
        for (const auto& [v, p] : s.marginals) m[v.name()] = p;
        steps.push_back({{"step", s.step},
                         {"pass", s.pass},
                         {"constraint", s.label},
                         {"gradient_before", s.gradient_before},
                         {"touched", s.touched},
                         {"marginals", m}});
      }
    }
  }
  return j;
}

}  // namespace rcndl
