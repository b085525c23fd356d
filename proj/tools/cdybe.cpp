#include "cdyb/harness/cli.hpp"

int main(int argc, char **argv) { return cdyb::cli_main(argc, argv); }
