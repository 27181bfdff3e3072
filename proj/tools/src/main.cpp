#include "ctp/cli.hpp"

int main(int argc, char** argv) { return ctp::cli::run(argc, argv); }
