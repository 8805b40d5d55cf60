#include <iostream>

#include "covroute/cli.hpp"

int main(int argc, char** argv) { return covroute::run_cli(argc, argv, std::cout, std::cerr); }
