// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
// Optional arguments restrict the run to the given ids.
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "quadric/verify.hpp"

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    const int id = std::atoi(argv[i]);
    if (id < 1 || id > quadric::kCriterionCount) {
      std::cerr << "usage: acceptance [id ...]   (ids 1.." << quadric::kCriterionCount << ")\n";
      return 2;
    }
    ids.push_back(id);
  }
  if (ids.empty())
    for (int i = 1; i <= quadric::kCriterionCount; ++i) ids.push_back(i);
  int failed = 0;
  double total = 0;
  for (int id : ids) {
    const auto r = quadric::run_criterion(id);
    std::cout << quadric::format_result(r) << std::endl;
    failed += !r.pass;
    total += r.seconds;
  }
  std::cout << ids.size() - static_cast<std::size_t>(failed) << "/" << ids.size() << " criteria passed in " << total
            << " s\n";
  return failed ? 1 : 0;
}
