#include <iostream>

#include "farmsim/cli.hpp"

int main(int argc, char** argv) {
  return farmsim::cli::Main(argc, argv, std::cout, std::cerr);
}
