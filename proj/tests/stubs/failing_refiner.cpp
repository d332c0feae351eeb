#include <cstdio>

int main() {
  std::fprintf(stderr, "failing_refiner: refusing to produce a mask\n");
  return 3;
}
