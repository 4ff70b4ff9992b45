#include <iostream>

#include "drauc/cli.hpp"

int main(int argc, char** argv) {
  return drauc::cli::run_command(argc, argv, std::cout, std::cerr);
}
