#include <iostream>
#include <string>
#include <vector>

#include "xner/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return xner::run_cli(args, std::cout, std::cerr);
}
