#include <iostream>

#include "cli_app.hpp"

int main(int argc, char** argv) { return compidx::cli::run(argc, argv, std::cout, std::cerr); }
