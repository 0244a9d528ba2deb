#include <cstdio>

int main() {
  std::puts("uwz: placeholder");
  return 0;
}
