#include <iostream>
#include <string>
#include <vector>

#include "cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  toolrag::cli::CliContext context{std::cout, std::cerr, nullptr};
  return toolrag::cli::run_cli(args, context);
}
