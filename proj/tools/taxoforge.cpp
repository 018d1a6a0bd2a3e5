#include <iostream>

#include "taxoforge/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return taxoforge::run(args, std::cout, std::cerr, std::cin);
}
