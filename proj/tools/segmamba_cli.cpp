#include <iostream>

#include "segmamba/cli.hpp"

int main(int argc, char** argv) {
    return segmamba::cli::run(argc, argv, std::cout, std::cerr);
}
