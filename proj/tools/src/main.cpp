#include <iostream>
#include <string>
#include <vector>

#include "membrane_cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return membrane::cli::run(args, std::cout, std::cerr);
}
