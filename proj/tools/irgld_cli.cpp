#include "irgld/cli.hpp"

int main(int argc, char** argv) { return irgld::dispatch(argc, argv); }
