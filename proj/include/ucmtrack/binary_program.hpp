// Copyright 2026 The ucmtrack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ucmtrack {

enum class Sense : std::uint8_t { eq, le, ge };

struct Term {
  std::int32_t var = 0;
  std::int32_t coef = 0;
  friend bool operator==(const Term&, const Term&) = default;
};

struct Row {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::eq;
  std::int32_t rhs = 0;
};

struct Variable {
  std::string name;
  double objective = 0;
};

// Bounding hint for the solver: the constraints guarantee that at most
// `capacity` of `members` are 1, and only when `selector` is 1. Groups may
// form a forest (`parent`) whose ancestor/descendant selectors are pairwise
// exclusive. Groups sharing a `stage` (>= 0) are split into covers; the
// groups of each cover hold every positive variable of the stage, so the
// stage is bounded by its cheapest cover.
struct SelectionGroup {
  std::int32_t selector = -1;
  std::vector<std::int32_t> members;
  std::int32_t parent = -1;
  std::int32_t capacity = 1;
  std::int32_t stage = -1;
  std::int32_t cover = 0;
};

// Maximization over binary variables subject to integer linear rows.
struct BinaryProgram {
  std::vector<Variable> variables;
  std::vector<Row> rows;
  std::vector<SelectionGroup> groups;
  bool groups_laminar = false;  // parent links of `groups` are meaningful

  std::int32_t add_variable(std::string name, double objective) {
    variables.push_back({std::move(name), objective});
    return static_cast<std::int32_t>(variables.size() - 1);
  }

  void add_row(std::string name, std::vector<Term> terms, Sense sense, std::int32_t rhs) {
    for (const auto& t : terms) {
      if (t.var < 0 || static_cast<std::size_t>(t.var) >= variables.size()) {
        throw std::out_of_range("binary program: row '" + name + "' references an unknown variable");
      }
    }
    rows.push_back({std::move(name), std::move(terms), sense, rhs});
  }

  std::size_t size() const { return variables.size(); }

  double evaluate(std::span<const std::uint8_t> values) const {
    double obj = 0;
    for (std::size_t i = 0; i < variables.size(); ++i) {
      if (values[i]) obj += variables[i].objective;
    }
    return obj;
  }

  static bool row_satisfied(const Row& row, std::span<const std::uint8_t> values) {
    std::int64_t act = 0;
    for (const auto& t : row.terms) act += static_cast<std::int64_t>(t.coef) * values[static_cast<std::size_t>(t.var)];
    switch (row.sense) {
      case Sense::eq: return act == row.rhs;
      case Sense::le: return act <= row.rhs;
      case Sense::ge: return act >= row.rhs;
    }
    return false;
  }

  // Name of the first violated row, if any.
  std::optional<std::string> first_violation(std::span<const std::uint8_t> values) const {
    if (values.size() != variables.size()) return std::string("<assignment size mismatch>");
    for (const auto& r : rows) {
      if (!row_satisfied(r, values)) return r.name;
    }
    return std::nullopt;
  }
};

// Given exclusion pairs (descendant, ancestor) over `n` items, returns the
// forest parent of every item when the pairs are exactly the
// ancestor/descendant closure of a forest, otherwise nullopt.
inline std::optional<std::vector<std::int32_t>> laminar_parents(
    std::size_t n, std::span<const std::pair<std::int32_t, std::int32_t>> pairs) {
  std::vector<std::set<std::int32_t>> ancestors(n);
  for (auto [sub, super] : pairs) {
    if (sub < 0 || super < 0 || static_cast<std::size_t>(sub) >= n ||
        static_cast<std::size_t>(super) >= n || sub == super) {
      return std::nullopt;
    }
    ancestors[static_cast<std::size_t>(sub)].insert(super);
  }
  std::vector<std::int32_t> parent(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    // The closest ancestor is the one with the most ancestors of its own.
    std::size_t best_depth = 0;
    for (std::int32_t a : ancestors[i]) {
      const std::size_t depth = ancestors[static_cast<std::size_t>(a)].size() + 1;
      if (parent[i] < 0 || depth > best_depth) {
        parent[i] = a;
        best_depth = depth;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (parent[i] < 0) continue;
    std::set<std::int32_t> expected = ancestors[static_cast<std::size_t>(parent[i])];
    expected.insert(parent[i]);
    if (expected != ancestors[i]) return std::nullopt;
  }
  return parent;
}

}  // namespace ucmtrack
