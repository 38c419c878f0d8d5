#include <iostream>
#include <string>
#include <vector>

#include "rankone/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv, argv + argc);
    return rankone::run_cli(args, std::cout, std::cerr);
}
