#include "fracpde/harness.hpp"

int main(int argc, char** argv) { return fracpde::cli_dispatch(argc, argv); }
