#include <iostream>

#include "tcssl/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return tcssl::cli_main(args, std::cout, std::cerr);
}
