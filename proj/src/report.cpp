#include "rpl/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace rpl {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Degenerate:
      return "degenerate";
  }
  return "fail";
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t ChainReport::add_term(std::string label, double value) {
  labels.push_back(std::move(label));
  values.push_back(value);
  return values.size() - 1;
}

void ChainReport::compare(std::size_t lhs, std::size_t rhs) {
  Comparison c{lhs, rhs, values.at(lhs) - values.at(rhs), tol, Verdict::Pass};
  if (degenerate) {
    c.verdict = Verdict::Degenerate;
  } else if (!(c.gap >= -c.tol)) {
    c.verdict = Verdict::Fail;
  }
  comparisons.push_back(c);
}

void ChainReport::compare_chain() {
  for (std::size_t i = 0; i + 1 < values.size(); ++i) compare(i, i + 1);
}

void ChainReport::add_check(std::string name, double value, double check_tol, std::string detail) {
  checks.push_back({std::move(name), value, check_tol, std::abs(value) <= check_tol, std::move(detail)});
}

void ChainReport::add_flag_check(std::string name, bool ok, std::string detail) {
  checks.push_back({std::move(name), ok ? 0.0 : 1.0, 0.0, ok, std::move(detail)});
}

void ChainReport::meta(std::string key, std::string value) {
  metadata.emplace_back(std::move(key), std::move(value));
}

void ChainReport::meta(std::string key, double value) { meta(std::move(key), format_number(value)); }

double ChainReport::scale() const {
  double s = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) s = std::max(s, std::abs(v));
  }
  return s;
}

std::vector<double> ChainReport::gaps() const {
  std::vector<double> g;
  for (auto& c : comparisons) g.push_back(c.gap);
  return g;
}

double ChainReport::worst_violation() const {
  double w = 0.0;
  for (auto& c : comparisons) w = std::max(w, -c.gap);
  return w;
}

bool ChainReport::passed() const {
  bool ok = std::all_of(comparisons.begin(), comparisons.end(),
                        [](const Comparison& c) { return c.verdict != Verdict::Fail; });
  return ok && std::all_of(checks.begin(), checks.end(), [](const SubCheck& c) { return c.passed; });
}

namespace {

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

}  // namespace

std::string to_json(const ChainReport& r, int indent) {
  nlohmann::ordered_json j;
  j["chain"] = r.chain;
  j["passed"] = r.passed();
  j["degenerate"] = r.degenerate;
  j["advisory"] = r.advisory;
  j["tol"] = number(r.tol);
  auto& terms = j["terms"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    terms.push_back({{"label", r.labels[i]}, {"value", number(r.values[i])}});
  }
  auto& comparisons = j["comparisons"] = nlohmann::ordered_json::array();
  for (auto& c : r.comparisons) {
    comparisons.push_back({{"lhs", r.labels[c.lhs]},
                           {"rhs", r.labels[c.rhs]},
                           {"gap", number(c.gap)},
                           {"tol", number(c.tol)},
                           {"verdict", to_string(c.verdict)}});
  }
  auto& checks = j["checks"] = nlohmann::ordered_json::array();
  for (auto& c : r.checks) {
    nlohmann::ordered_json entry{{"name", c.name},
                                 {"value", number(c.value)},
                                 {"tol", number(c.tol)},
                                 {"passed", c.passed}};
    if (!c.detail.empty()) entry["detail"] = c.detail;
    checks.push_back(entry);
  }
  j["notes"] = r.notes;
  auto& meta = j["metadata"] = nlohmann::ordered_json::object();
  for (auto& [k, v] : r.metadata) meta[k] = v;
  j["runtime_seconds"] = r.runtime_seconds;
  return j.dump(indent);
}

std::string to_csv(const ChainReport& r, bool header) {
  std::ostringstream os;
  if (header) os << "chain,term,value,gap,tol,verdict\n";
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    os << r.chain << ',' << r.labels[i] << ',' << format_number(r.values[i]) << ',';
    auto it = std::find_if(r.comparisons.begin(), r.comparisons.end(),
                           [&](const Comparison& c) { return c.lhs == i; });
    if (it != r.comparisons.end()) {
      os << format_number(it->gap) << ',' << format_number(it->tol) << ',' << to_string(it->verdict);
    } else {
      os << ",,";
    }
    os << '\n';
  }
  for (const SubCheck& c : r.checks) {
    os << r.chain << ",check:" << c.name << ',' << format_number(c.value) << ",," << format_number(c.tol) << ','
       << (c.passed ? "pass" : "fail") << '\n';
  }
  return os.str();
}

}  // namespace rpl
