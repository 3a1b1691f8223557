#include <iostream>
#include <string>
#include <vector>

#include "ckt/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ckt::cli::run(args, std::cout, std::cerr);
}
