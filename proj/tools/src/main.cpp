#include <iostream>

#include "alda/cli.hpp"

int main(int argc, char** argv) { return alda::cli::main(argc, argv, std::cout, std::cerr); }
