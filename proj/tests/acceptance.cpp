// Acceptance gate: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exits nonzero if any fails.

#include <cstdio>

#include "symflow/selftest.hpp"

int main() {
    const auto report = symflow::selftest::run(1);
    std::fputs(symflow::selftest::to_text(report).c_str(), stdout);
    return report.all_pass ? 0 : 1;
}
