#include <iostream>
#include <string>
#include <vector>

#include "courseforge/cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return courseforge::cli::dispatch(args, {std::cin, std::cout, std::cerr});
}
