#include <iostream>
#include <string>
#include <vector>

#include "kronsensus/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return kronsensus::run_cli(args, std::cout, std::cerr);
}
