#include "feedsim/cli.hpp"

int main(int argc, char** argv) { return feedsim::cli::run(argc, argv); }
