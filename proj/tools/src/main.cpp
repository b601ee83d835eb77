#include <iostream>

#include "amest/cli/commands.hpp"

int main(int argc, char** argv) { return amest::cli::run_cli(argc, argv, std::cout, std::cerr); }
