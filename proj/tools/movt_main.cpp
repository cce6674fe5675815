#include "movt/cli.hpp"

int main(int argc, char** argv) { return movt::cli::run(argc, argv); }
