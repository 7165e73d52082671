#include "cli.hpp"

int main(int argc, char** argv)
{
    return windregime::cli::run_cli(argc, argv);
}
