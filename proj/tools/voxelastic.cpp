#include <iostream>
#include <string>
#include <vector>

#include "voxelastic/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return voxelastic::cli::execute(args, std::cout, std::cerr);
}
