#include "cfgsim/cli.hpp"

#include <iostream>

int main(int argc, char **argv) {
    return cfgsim::cli::run(argc, argv, std::cout, std::cerr);
}
