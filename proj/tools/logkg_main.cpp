#include <iostream>

#include "logkg/cli.hpp"

int main(int argc, char** argv) { return logkg::run_cli(argc, argv, std::cout, std::cerr); }
