#include "chipdress/cli.hpp"

int main(int argc, char** argv) { return chipdress::cli::dispatch(argc, argv); }
