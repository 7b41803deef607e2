#include <cstdio>

int main() {
  std::puts("compnet: cli not wired yet");
  return 1;
}
