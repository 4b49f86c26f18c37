#include "ssn/cli.hpp"

int main(int argc, char** argv) {
    return ssn::cli::run_main(argc, argv);
}
