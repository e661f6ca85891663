#include <string>
#include <vector>

#include "connselect/cli.hpp"

int main(int argc, char** argv) {
  return connselect::run_cli(std::vector<std::string>(argv, argv + argc));
}
