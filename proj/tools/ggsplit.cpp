// Command line driver. The real logic lives in ggsplit/cli.hpp so tests can
// call it in-process.
#include <iostream>

int main(int argc, char** argv) {
  (void)argc;
  (void)argv;
  std::cerr << "ggsplit: not yet wired up\n";
  return 1;
}
