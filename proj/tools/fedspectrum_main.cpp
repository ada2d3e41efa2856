#include <iostream>

#include "fedspectrum/cli.hpp"

int main(int argc, char** argv) { return fedspectrum::cli::run_cli(argc, argv, std::cout, std::cerr); }
