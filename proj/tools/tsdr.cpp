#include <iostream>

#include "tsdr/cli.hpp"

int main(int argc, char** argv) { return tsdr::run_cli(argc, argv, std::cout, std::cerr); }
