#include <iostream>

#include "rpdp/cli.hpp"

int main(int argc, char** argv) { return rpdp::cli::main(argc, argv, std::cout); }
