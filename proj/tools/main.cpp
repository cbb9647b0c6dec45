#include <iostream>
#include <string>
#include <vector>

#include "dualbev/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dualbev::run_cli(args, std::cout, std::cerr);
}
