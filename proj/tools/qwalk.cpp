#include <iostream>
#include <string>
#include <vector>

#include "qwalk/cli.hpp"

int main(int argc, char** argv) {
  return qwalk::cli::main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
