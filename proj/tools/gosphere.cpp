#include "gosphere/cli.hpp"

int main(int argc, char** argv) { return gosphere::cli::dispatch(argc, argv); }
