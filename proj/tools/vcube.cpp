#include "vcube/cli.hpp"

int main(int argc, char** argv) { return vcube::cli_main(argc, argv); }
