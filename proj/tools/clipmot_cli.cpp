#include <iostream>

#include "clipmot/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return clipmot::run_cli(args, std::cout, std::cerr);
}
