#include "tsms/cli.hpp"

int main(int argc, char** argv) { return tsms::cli::run_command(argc, argv); }
