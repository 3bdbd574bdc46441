#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return s2p::cli_dispatch(argc, argv, std::cout, std::cerr); }
