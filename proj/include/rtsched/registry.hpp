#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rtsched/interference.hpp"
#include "rtsched/policies.hpp"

namespace rts {

/// Stable names accepted by make_policy, in listing order.
const std::vector<std::string>& policy_names();

/// Builds the named policy for `graph`. Throws Error{InvalidArgument} for an
/// unknown name and whatever the policy's constructor raises otherwise.
std::unique_ptr<Policy> make_policy(const std::string& name, const InterferenceGraph& graph,
                                    const PolicyParams& params);

}  // namespace rts
