#pragma once

#include <string>
#include <utility>
#include <vector>

namespace rpl {

// tol = c0 + c1 * h * scale.
struct ToleranceModel {
  double c0 = 1e-9;
  double c1 = 4.0;

  double tol(double h, double scale) const { return c0 + c1 * h * scale; }
};

enum class Verdict { Pass, Fail, Degenerate };
std::string to_string(Verdict v);

// values[lhs] >= values[rhs] - tol.
struct Comparison {
  std::size_t lhs = 0;
  std::size_t rhs = 0;
  double gap = 0.0;
  double tol = 0.0;
  Verdict verdict = Verdict::Pass;
};

struct SubCheck {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool passed = true;
  std::string detail;
};

// Terms of an inequality chain with their gap verdicts. A failing report is
// data; chains never throw on a violated inequality.
struct ChainReport {
  std::string chain;
  std::vector<std::string> labels;
  std::vector<double> values;
  std::vector<Comparison> comparisons;
  std::vector<SubCheck> checks;
  double tol = 0.0;
  bool degenerate = false;
  bool advisory = false;
  std::vector<std::string> notes;
  std::vector<std::pair<std::string, std::string>> metadata;
  double runtime_seconds = 0.0;

  explicit ChainReport(std::string name = {}) : chain(std::move(name)) {}

  std::size_t add_term(std::string label, double value);
  // Compares two terms with the current tol; verdict Degenerate when the
  // report is flagged degenerate.
  void compare(std::size_t lhs, std::size_t rhs);
  // Consecutive comparisons 0>=1>=2...
  void compare_chain();
  void add_check(std::string name, double value, double tol, std::string detail = {});
  void add_flag_check(std::string name, bool passed, std::string detail = {});
  void meta(std::string key, std::string value);
  void meta(std::string key, double value);

  double scale() const;  // max |value|
  std::vector<double> gaps() const;
  // max(0, -gap) over all comparisons.
  double worst_violation() const;
  bool passed() const;
};

std::string to_json(const ChainReport& report, int indent = 2);
// Rows `chain,term,value,gap,tol,verdict`; gap and verdict are those of the
// comparison whose left side is the term, empty otherwise. Sub-checks follow
// as `check:<name>` rows.
std::string to_csv(const ChainReport& report, bool header = true);

std::string format_number(double v);

}  // namespace rpl
