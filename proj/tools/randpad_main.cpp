#include <iostream>

#include "randpad/commands.hpp"

int main(int argc, char** argv) { return randpad::cli_main(argc, argv, std::cout, std::cerr); }
