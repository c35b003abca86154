#include "opzosa/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return opzosa::run_cli(argc, argv, std::cout, std::cerr); }
