// Acceptance gate: every end-to-end criterion at its stated tolerance,
// one pass/fail line per criterion.  Exits 0 only when all pass.

#include <cstdio>

#include "graphflow/parallel.hpp"
#include "graphflow/verify.hpp"

int main() {
  graphflow::VerifyContext ctx(12345, graphflow::resolve_threads(0), false);
  const auto results = graphflow::run_suite(ctx, "all");
  size_t passed = 0;
  for (const auto& r : results) {
    std::printf("[%s] %2d %-34s %s (%.2fs)\n", r.pass ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.detail.c_str(), r.seconds);
    if (r.pass) ++passed;
  }
  std::printf("%zu/%zu criteria passed\n", passed, results.size());
  return passed == results.size() ? 0 : 1;
}
