#include <iostream>

#include "cpsi/cli.hpp"

int main(int argc, char** argv) { return cpsi::run_cli(argc, argv, std::cout, std::cerr); }
