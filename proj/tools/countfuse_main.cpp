#include <iostream>
#include <string>
#include <vector>

#include "countfuse/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return countfuse::cli::run(args, std::cout, std::cerr);
}
