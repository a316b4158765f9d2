#include "wrapcop/cli.hpp"

int main(int argc, char** argv) { return wrapcop::cli::run_main(argc, argv); }
