#include <iostream>

#include "waynav/cli.hpp"

int main(int argc, char** argv) { return waynav::run_cli(argc, argv, std::cout, std::cerr); }
