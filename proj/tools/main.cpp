#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return svmtune::cli::run(argc, argv, std::cout, std::cerr); }
