#include <iostream>

#include "loghold/cli.hpp"

int main(int argc, char** argv) {
  return loghold::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
