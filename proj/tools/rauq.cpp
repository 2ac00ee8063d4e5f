#include <iostream>

#include "rauq/cli.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  return rauq::cli::run(argc, argv, std::cout, std::cerr);
}
