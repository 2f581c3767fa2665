#include "treesynth/trace.hpp"

#include "json.hpp"
#include "treesynth/printer.hpp"

namespace treesynth {

std::string SearchTrace::to_json() const {
  using nlohmann::ordered_json;
  ordered_json j;
  j["constraint"] = print_term(constraint);
  j["solved"] = solved();
  j["solution"] = solution ? ordered_json(print_term(*solution)) : ordered_json(nullptr);
  j["failure_reason"] = failure_reason;
  j["seconds"] = seconds;
  j["gamma"] = gamma;
  j["decay_base"] = decay_base;
  j["seed"] = seed;
  j["counters"] = {{"nodes_expanded", counters.nodes_expanded},
                   {"oracle_calls", counters.oracle_calls},
                   {"rollouts", counters.rollouts},
                   {"bigsteps", counters.bigsteps}};
  ordered_json path = ordered_json::array();
  for (const TraceNode& n : this->path) {
    ordered_json children = ordered_json::array();
    for (const TraceChild& c : n.children) {
      children.push_back({{"rule", c.rule},
                          {"state", print_term(c.state)},
                          {"visits", c.visits},
                          {"cumulative_value", c.cumulative_value},
                          {"prior_policy", c.prior_policy}});
    }
    path.push_back({{"state", print_term(n.state)},
                    {"visits", n.visits},
                    {"cumulative_value", n.cumulative_value},
                    {"prior_value", n.prior_value},
                    {"children", children}});
  }
  j["path"] = path;
  return j.dump(1) + "\n";
}

}  // namespace treesynth
