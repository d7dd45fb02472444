#include "rstp/cli.hpp"

int main(int argc, char** argv) { return rstp::cli::run(argc, argv); }
