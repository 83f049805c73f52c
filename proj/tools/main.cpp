#include "captune/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return captune::cli::run(argc, argv, std::cout, std::cerr);
}
