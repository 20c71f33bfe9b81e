#include <iostream>

#include "gsindy/cli.hpp"

int main(int argc, char** argv) { return gsindy::cli::run(argc, argv, std::cout, std::cerr); }
