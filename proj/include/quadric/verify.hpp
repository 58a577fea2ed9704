#pragma once

#include <string>
#include <vector>

namespace quadric {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;       // the check held and finished inside its time limit
  bool check_held = false;
  std::string detail;
  double seconds = 0;
  double limit_seconds = 0;
};

inline constexpr int kCriterionCount = 11;

/// Run one acceptance criterion (1..11).
CriterionResult run_criterion(int id);

/// Run the listed criteria (all when empty), in order.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& which = {});

/// "PASS  3  delta identity ... (0.4 s, limit 60 s)"
std::string format_result(const CriterionResult& r);

}  // namespace quadric
