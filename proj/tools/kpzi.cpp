#include <kpzi/cli.hpp>

int main(int argc, char** argv) { return kpzi::cli::run(argc, argv); }
