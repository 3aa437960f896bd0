#include "parablow/cli.hpp"

int main(int argc, char** argv) { return parablow::cli_main(argc, argv); }
