#pragma once

#include <string>
#include <utility>
#include <vector>

#include "toep/matrix.hpp"

namespace toep {

/// One certified quantity: a named residual checked against a tolerance.
struct CheckItem {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// A self-describing bundle of certified residuals for one construction.
/// `theorem` carries the stable anchor name used in emitted certificates.
struct Report {
  std::string theorem;
  std::vector<CheckItem> items;
  /// Quantities reported but not asserted (e.g. commutation defects).
  std::vector<std::pair<std::string, double>> measurements;
  std::vector<std::string> notes;
  long iterations = 0;
  long depth = 0;

  void add(const std::string& name, double value, double tol) {
    items.push_back({name, value, tol, value <= tol});
  }
  void add_flag(const std::string& name, bool ok) {
    items.push_back({name, ok ? 0.0 : 1.0, 0.5, ok});
  }
  double value(const std::string& name) const {
    for (const auto& it : items)
      if (it.name == name) return it.value;
    throw Error(errc::bad_input, "no such check item: " + name);
  }
  bool pass() const {
    for (const auto& it : items)
      if (!it.pass) return false;
    return true;
  }
};

}  // namespace toep
