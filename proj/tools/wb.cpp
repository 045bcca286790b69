#include <iostream>

#include "wb/cli.hpp"

int main(int argc, char** argv)
{
    return wb::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
