#ifndef JUMPLDP_CLI_HPP
#define JUMPLDP_CLI_HPP

#include <string>
#include <vector>

namespace jumpldp {

// Dispatches one CLI invocation. Returns 0 on success, 1 on domain errors,
// 2 on usage errors.
int cli_dispatch(const std::vector<std::string>& args);

}  // namespace jumpldp

#endif
