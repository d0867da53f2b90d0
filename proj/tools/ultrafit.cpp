#include "ultrafit_cli.hpp"

int main(int argc, char** argv) { return ultrafit::cli::run_cli(argc, argv, std::cout, std::cerr); }
