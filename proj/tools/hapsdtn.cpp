#include <iostream>

#include "hapsdtn/cli.hpp"

int main(int argc, char** argv) { return hapsdtn::cli::run(argc, argv, std::cout, std::cerr); }
