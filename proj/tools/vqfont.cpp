#include "vqfont/cli/commands.hpp"

int main(int argc, char** argv) {
  return vqfont::cli::dispatch(argc, argv);
}
