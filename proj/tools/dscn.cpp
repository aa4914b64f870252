#include "dscn/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return dscn::cli::run(argc, argv, std::cout, std::cerr);
}
