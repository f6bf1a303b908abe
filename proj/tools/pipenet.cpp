#include <iostream>

#include "pipenet/cli.hpp"

int main(int argc, char** argv) {
  return pipenet::cli::run({argv, argv + argc}, std::cout, std::cerr);
}
