#include <dsc/cli.hpp>

int main(int argc, char** argv) { return dsc::cli::main_entry(argc, argv); }
