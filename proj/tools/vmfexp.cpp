#include <iostream>
#include <string>
#include <vector>

#include "vmfexp/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return vmfexp::cli::run(args, std::cout, std::cerr);
}
