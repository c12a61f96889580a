#include "ndf/cli.hpp"

int main(int argc, char** argv) { return ndf::cli::run(argc, argv); }
