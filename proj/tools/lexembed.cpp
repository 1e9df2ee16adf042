#include "lexembed/cli.hpp"

int main(int argc, char** argv) { return lexembed::cli::run(argc, argv); }
