#include "bilap/cli/commands.hpp"

int main(int argc, char** argv) { return bilap::cli::run_cli(argc, argv); }
