#include "rtsched/registry.hpp"

#include "rtsched/error.hpp"
#include "rtsched/oracle.hpp"

namespace rts {

const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names = {
      "mws", "gms", "famix-ms", "famix-nd", "famix-coloring", "myopic", "frame-optimal",
  };
  return names;
}

std::unique_ptr<Policy> make_policy(const std::string& name, const InterferenceGraph& graph,
                                    const PolicyParams& params) {
  if (name == "mws") return std::make_unique<MwsPolicy>(graph, params);
  if (name == "gms") return std::make_unique<GmsPolicy>();
  if (name == "famix-ms") return FamixMsPolicy::full(graph, params);
  if (name == "famix-nd") return std::make_unique<FamixNdPolicy>(graph, params);
  if (name == "famix-coloring") return FamixMsPolicy::coloring(graph, params);
  if (name == "myopic") return std::make_unique<MyopicPolicy>(graph, params);
  if (name == "frame-optimal") return std::make_unique<FrameOptimalPolicy>(graph, params);
  throw Error(ErrorCode::InvalidArgument, "unknown policy '" + name + "'");
}

}  // namespace rts
