#include <iostream>

#include "symadex/cli.hpp"

int main(int argc, char** argv) {
    return symadex::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
