#include <iostream>

#include "roadfield/cli.hpp"

int main(int argc, char** argv) { return roadfield::cli::main_entry(argc, argv, std::cout, std::cerr); }
