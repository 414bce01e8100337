#include "eqctsp/cli.hpp"

int main(int argc, char** argv) { return eqctsp::cli::dispatch(argc, argv); }
