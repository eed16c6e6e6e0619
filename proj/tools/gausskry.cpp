#include <iostream>

#include "gausskry/cli.hpp"

int main(int argc, char** argv) { return gausskry::cli::main(argc, argv, std::cout, std::cerr); }
