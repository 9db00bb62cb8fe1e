#include "nvp/cli.hpp"

int main(int argc, char** argv) { return nvp::cli::run(argc, argv); }
