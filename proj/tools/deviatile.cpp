#include <iostream>
#include <string>
#include <vector>

#include "deviatile/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return deviatile::cli::run(args, std::cout, std::cerr);
}
