#pragma once

#include <string>
#include <vector>

namespace sgt::cli {

// Entry point for the sgt-lab tool; args excludes the program name.
// Exit codes: 0 success, 1 configuration error, 2 bound violation or
// non-finite numerical failure.
int run(const std::vector<std::string>& args);

}  // namespace sgt::cli
