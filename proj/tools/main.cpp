#include "calrev/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return calrev::run_cli(argc, argv, std::cout, std::cerr); }
