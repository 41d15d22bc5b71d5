#include <cstdlib>
#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  return ksmi::cli::run(argc, argv, std::cout, std::cerr, std::getenv("KSMI_SEED"));
}
