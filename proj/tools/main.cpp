#include "lungphase/cli.hpp"

int main(int argc, char** argv) { return lungphase::cli::run(argc, argv); }
