#include <iostream>

#include "shaken_trap/harness.hpp"

int main(int argc, char** argv) { return shaken_trap::run(argc, argv, std::cout, std::cerr); }
