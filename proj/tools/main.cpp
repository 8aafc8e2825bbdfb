#include "ptgrad/cli.hpp"

int main(int argc, char** argv) { return ptgrad::cli_main(argc, argv); }
