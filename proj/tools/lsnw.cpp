#include "lsnw/cli.hpp"

int main(int argc, char** argv) { return lsnw::cli::dispatch(argc, argv); }
