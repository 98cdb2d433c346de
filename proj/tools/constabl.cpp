#include "constabl/cli.hpp"

int main(int argc, char** argv) { return constabl::cli_main(argc, argv); }
