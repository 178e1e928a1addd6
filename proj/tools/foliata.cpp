#include <iostream>

#include "foliata/cli.hpp"

int main(int argc, char** argv) { return foliata::cli::run(argc, argv, std::cout, std::cerr); }
