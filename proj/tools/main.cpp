#include "fchp/cli.hpp"

int main(int argc, char** argv) { return fchp::cli::dispatch(argc, argv); }
