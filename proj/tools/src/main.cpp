#include "tecoord/cli.hpp"

int main(int argc, char** argv) { return tecoord::cli::run(argc, argv); }
