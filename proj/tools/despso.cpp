#include <iostream>

#include "despso/cli.hpp"

int main(int argc, char** argv) { return despso::cli::run(argc, argv, std::cout, std::cerr); }
