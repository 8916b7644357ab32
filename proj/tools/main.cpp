#include "cvsim/cli_app.hpp"

int main(int argc, char** argv) { return cvsim::cli::run(argc, argv); }
