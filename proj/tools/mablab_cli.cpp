#include <iostream>
#include <string>
#include <vector>

#include "mablab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mablab::cli_dispatch(args, std::cout, std::cerr);
}
