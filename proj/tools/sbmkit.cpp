#include "sbmkit/cli.hpp"

int main(int argc, char** argv) { return sbmkit::cli_main(argc, argv); }
