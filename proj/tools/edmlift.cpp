#include <iostream>

#include "edmlift/pipeline/commands.hpp"

int main(int argc, char** argv) {
  return edmlift::pipeline::run_cli(argc, argv, std::cout, std::cerr);
}
