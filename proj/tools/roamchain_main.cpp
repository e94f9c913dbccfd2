#include <iostream>
#include <string>
#include <vector>

#include "roamchain/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return roamchain::cli::run(args, std::cout, std::cerr);
}
