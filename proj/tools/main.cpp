#include <iostream>

#include "cli/app.hpp"

int main(int argc, char** argv) {
    return canard::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
