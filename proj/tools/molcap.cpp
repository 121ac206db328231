#include <molcap/cli.hpp>

int main(int argc, char** argv)
{
    return molcap::cli::main(argc, argv);
}
