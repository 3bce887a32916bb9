#include "mcmplan/cli.hpp"

int main(int argc, char** argv) { return mcmplan::cli_main(argc, argv); }
