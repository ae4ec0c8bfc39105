#include "fquant/cli.hpp"

int main(int argc, char** argv) { return fquant::cli_run(argc, argv); }
