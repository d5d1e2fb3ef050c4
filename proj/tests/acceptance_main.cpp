// Acceptance suite: one pass/fail line per criterion. Returns the number of
// failed criteria as the exit code.
#include <cstdio>

int main() {
  std::printf("acceptance suite placeholder\n");
  return 1;
}
