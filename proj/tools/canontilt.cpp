#include "canon/cli.hpp"

int main(int argc, char** argv) { return canon::cli::run(argc, argv); }
