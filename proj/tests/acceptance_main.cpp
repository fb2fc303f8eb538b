#include <iostream>

#include <nnlif/acceptance.hpp>

int main() {
  try {
    const auto results = nnlif::run_acceptance({}, &std::cout);
    std::size_t passed = 0;
    for (const auto& r : results) passed += r.passed ? 1 : 0;
    std::cout << passed << "/" << results.size() << " criteria passed\n";
    return passed == results.size() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "acceptance aborted: " << e.what() << '\n';
    return 3;
  }
}
