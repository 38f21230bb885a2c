#include "clrl/cli.hpp"

int main(int argc, char** argv) { return clrl::cli_main(argc, argv); }
