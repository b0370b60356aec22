#include <iostream>
#include <string>
#include <vector>

#include "sparsagg/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return sparsagg::cli::dispatch(args, std::cout, std::cerr);
}
