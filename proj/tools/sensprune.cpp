#include <iostream>

#include "sensprune/cli.hpp"

int main(int argc, char** argv) {
  return sensprune::cli_main(argc, argv, std::cout, std::cerr);
}
