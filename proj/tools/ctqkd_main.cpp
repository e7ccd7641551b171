#include <iostream>

#include "ctqkd/cli.hpp"

int main(int argc, char** argv) { return ctqkd::run_cli(argc, argv, std::cout, std::cerr); }
