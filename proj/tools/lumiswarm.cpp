#include <iostream>

#include "lumiswarm/cli.hpp"

int main(int argc, char** argv) {
  return lumiswarm::runCli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
