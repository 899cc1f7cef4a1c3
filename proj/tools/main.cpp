#include <string>
#include <vector>

#include "jumpldp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return jumpldp::cli_dispatch(args);
}
