#include <iostream>

#include "tqd/cli.hpp"

int main(int argc, char **argv) {
  return tqd::cli::run(argc, argv, std::cin, std::cout, std::cerr);
}
