#include "netsemi/cli.hpp"

int main(int argc, char** argv)
{
    return netsemi::cli::main(argc, argv);
}
