// Runs every acceptance criterion once and prints one PASS/FAIL line per criterion.

#include <cstdlib>
#include <iostream>
#include <string>

#include "spinelaw/verify.hpp"

int main(int argc, char** argv) {
  auto options = spinelaw::Verify_options{};
  options.threads = 1;
  options.alt_threads = 2;
  if (argc > 1) options.out_dir = argv[1];
  try {
    const auto report = spinelaw::run_verify(options, &std::cout);
    auto failed = 0;
    for (const auto& c : report.criteria) failed += c.passed ? 0 : 1;
    std::cout << "acceptance: " << report.criteria.size() - failed << "/" << report.criteria.size() << " criteria passed\n";
    return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << '\n';
    return EXIT_FAILURE;
  }
}
