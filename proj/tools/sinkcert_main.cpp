#include <sinkcert/cli.hpp>

int main(int argc, char** argv) {
    return sinkcert::run_command(std::vector<std::string>(argv + 1, argv + argc));
}
