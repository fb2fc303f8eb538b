#pragma once

// Desk-scale acceptance suite: ten numbered criteria, each an independent
// numerical experiment that reports its measured values and a verdict.

#include <ostream>
#include <string>
#include <vector>

namespace nnlif {

struct CriterionResult {
  int number{0};
  std::string name;
  bool passed{false};
  std::string details;  // measured values as key=value pairs
  double seconds{0};
};

struct AcceptanceOptions {
  /// Criterion names or numbers; empty selects all.
  std::vector<std::string> only;
  /// Multiplies every upper-bound tolerance; lower bounds are unaffected.
  double tolerance_scale{1.0};
  unsigned threads{1};
};

/// Names of criteria 1..10 in order.
const std::vector<std::string>& criterion_names();

/// Maps a name or number to a criterion number; throws ParameterError on an
/// unknown selector.
int criterion_number(const std::string& selector);

/// Runs the selected criteria in ascending order. When `progress` is given,
/// each result line is written there as soon as it is available.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {},
                                            std::ostream* progress = nullptr);

/// "PASS  3 blowup-interval  key=value ..." on one line.
std::string format_result(const CriterionResult& r);

}  // namespace nnlif
