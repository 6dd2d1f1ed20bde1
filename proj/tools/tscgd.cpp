#include <iostream>

#include "tscgd/commands.hpp"

int main(int argc, char** argv) { return tscgd::cli_main(argc, argv, std::cout, std::cerr); }
