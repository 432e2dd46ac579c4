#ifndef EXACTSDP_TOOLS_CLI_H_
#define EXACTSDP_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace exactsdp::cli {

// Exit codes: 0 analysis completed, 1 pipeline failure, 2 usage or input error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace exactsdp::cli

#endif  // EXACTSDP_TOOLS_CLI_H_
