#include <iostream>
#include <string>
#include <vector>

#include "fog/pipeline.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return fog::run_cli(args, std::cout, std::cerr);
}
