#include <string>
#include <vector>

#include "sgt/cli.hpp"

int main(int argc, char** argv) {
  return sgt::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
