#pragma once

#include <string>
#include <vector>

namespace ecodec {

// Exit codes: 0 success, 2 user/config error, 1 internal error.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace ecodec
