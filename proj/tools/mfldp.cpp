#include "mfldp/cli/commands.hpp"

int main(int argc, char** argv) { return mfldp::cli::main_entry(argc, argv); }
