#include "qpois/cli.hpp"

int main(int argc, char** argv) { return qp::cli::main_entry(argc, argv); }
