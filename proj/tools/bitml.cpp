#include "bitml/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return bitml::run_cli(argc, argv, std::cout, std::cerr); }
