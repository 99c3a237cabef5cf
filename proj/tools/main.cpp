#include <iostream>
#include <string>
#include <vector>

#include "apdscore/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return apdscore::cli::run(args, std::cout, std::cerr);
}
