#include <iostream>

#include "sparsevar/cli.hpp"

int main(int argc, char** argv) {
    return sparsevar::cli::run(argc, argv, std::cout, std::cerr);
}
