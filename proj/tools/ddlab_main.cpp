#include "ddl/cli.hpp"

int main(int argc, char** argv) { return ddl::run_cli(argc, argv); }
