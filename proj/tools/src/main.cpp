#include <iostream>
#include <string>
#include <vector>

#include "cqed_cli/commands.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return cqed::cli::run_cli(args, std::cout, std::cerr);
}
