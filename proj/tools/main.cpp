#include "commands.hpp"

int main(int argc, char** argv) { return xeval::cli::run(argc, argv); }
