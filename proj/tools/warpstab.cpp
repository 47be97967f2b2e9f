#include <iostream>

#include "warpstab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return warpstab::cli::run(args, std::cout, std::cerr);
}
