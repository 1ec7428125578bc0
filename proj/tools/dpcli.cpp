#include "dp/cli.hpp"

int main(int argc, char** argv) { return dp::cli_main(argc, argv); }
