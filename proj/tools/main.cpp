#include "lipcmo/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return lipcmo::run_cli(argc, argv, std::cout, std::cerr);
}
