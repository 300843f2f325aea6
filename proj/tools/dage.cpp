#include <iostream>

#include "dage/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dage::run_cli(args, std::cout, std::cerr);
}
