#include <cstdio>

int main() {
  std::puts("onestep: subcommands not wired up yet");
  return 1;
}
