// SPDX-License-Identifier: Apache-2.0
#include <relep/cli.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    return relep::runCli(argc, argv, std::cout, std::cerr);
}
