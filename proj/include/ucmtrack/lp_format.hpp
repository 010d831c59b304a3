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

// CPLEX LP text for binary programs, and a reader for the subset we write.

#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <unordered_map>
#include <vector>

#include "ucmtrack/binary_program.hpp"

namespace ucmtrack {

// Shortest decimal text that parses back to `v`.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

class LpLineWriter {
 public:
  explicit LpLineWriter(std::ostream& out) : out_(out) {}

  void start(const std::string& label) {
    line_ = " " + label + ":";
  }
  void term(double coef, const std::string& var, bool first) {
    std::string piece = first ? (coef < 0 ? " -" : " ") : (coef < 0 ? " - " : " + ");
    const double mag = coef < 0 ? -coef : coef;
    if (mag != 1) piece += format_number(mag) + " ";
    piece += var;
    if (line_.size() + piece.size() > kWidth) flush_partial();
    line_ += piece;
  }
  void text(const std::string& s) {
    if (line_.size() + s.size() > kWidth) flush_partial();
    line_ += s;
  }
  void end() {
    out_ << line_ << '\n';
    line_.clear();
  }

 private:
  static constexpr std::size_t kWidth = 240;
  void flush_partial() {
    out_ << line_ << '\n';
    line_ = "   ";
  }
  std::ostream& out_;
  std::string line_;
};

}  // namespace detail

inline void export_lp(const BinaryProgram& bp, std::ostream& out) {
  detail::LpLineWriter w(out);
  out << "Maximize\n";
  w.start("obj");
  bool first = true;
  for (const auto& v : bp.variables) {
    if (v.objective == 0) continue;
    w.term(v.objective, v.name, first);
    first = false;
  }
  w.end();
  out << "Subject To\n";
  for (const auto& row : bp.rows) {
    w.start(row.name);
    bool f = true;
    for (const auto& t : row.terms) {
      w.term(t.coef, bp.variables[static_cast<std::size_t>(t.var)].name, f);
      f = false;
    }
    if (row.terms.empty()) w.text(" 0");
    const char* op = row.sense == Sense::eq ? " = " : row.sense == Sense::le ? " <= " : " >= ";
    w.text(op + std::to_string(row.rhs));
    w.end();
  }
  out << "Binary\n";
  for (const auto& v : bp.variables) out << ' ' << v.name << '\n';
  out << "End\n";
}

inline std::string export_lp(const BinaryProgram& bp) {
  std::ostringstream s;
  export_lp(bp, s);
  return s.str();
}

class LpParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reads LP text as written by export_lp. Variables are created in order of
// first appearance in the Binary section, so an exported program reads back
// with the same variable indices.
inline BinaryProgram parse_lp(std::istream& in) {
  std::vector<std::string> tokens;
  {
    std::string tok;
    std::string line;
    while (std::getline(in, line)) {
      const auto bs = line.find('\\');
      if (bs != std::string::npos) line.resize(bs);
      std::istringstream ls(line);
      while (ls >> tok) tokens.push_back(tok);
    }
  }
  enum class Part { none, objective, constraints, binary, done };
  Part part = Part::none;
  struct PendingRow {
    std::string name;
    std::vector<std::pair<double, std::string>> terms;
    Sense sense = Sense::eq;
    double rhs = 0;
  };
  std::vector<std::pair<double, std::string>> objective;
  std::vector<PendingRow> rows;
  std::vector<std::string> binaries;
  PendingRow cur;
  double sign = 1;
  double pending_coef = 1;
  bool expect_rhs = false;

  auto number = [](const std::string& s, double& v) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
  };
  auto reset_term = [&] {
    sign = 1;
    pending_coef = 1;
  };

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& tk = tokens[i];
    if (tk == "Maximize") { part = Part::objective; reset_term(); continue; }
    if (tk == "Subject" && i + 1 < tokens.size() && tokens[i + 1] == "To") {
      ++i;
      part = Part::constraints;
      reset_term();
      continue;
    }
    if (tk == "Binary") { part = Part::binary; continue; }
    if (tk == "End") { part = Part::done; break; }
    switch (part) {
      case Part::none:
      case Part::done:
        throw LpParseError("lp: unexpected token '" + tk + "' outside a section");
      case Part::binary:
        binaries.push_back(tk);
        break;
      case Part::objective:
      case Part::constraints: {
        auto& terms = part == Part::objective ? objective : cur.terms;
        if (expect_rhs) {
          double v;
          if (!number(tk, v)) throw LpParseError("lp: bad right-hand side '" + tk + "'");
          cur.rhs = v;
          rows.push_back(std::move(cur));
          cur = PendingRow{};
          expect_rhs = false;
          reset_term();
          break;
        }
        if (tk.size() > 1 && tk.back() == ':') {
          if (part == Part::constraints) cur.name = tk.substr(0, tk.size() - 1);
          break;
        }
        if (tk == "+") break;
        if (tk == "-") { sign = -sign; break; }
        if (tk == "=" || tk == "<=" || tk == ">=") {
          if (part != Part::constraints) throw LpParseError("lp: comparison in objective");
          cur.sense = tk == "=" ? Sense::eq : tk == "<=" ? Sense::le : Sense::ge;
          expect_rhs = true;
          break;
        }
        double v;
        if (number(tk, v)) {
          pending_coef = v;
          break;
        }
        if (tk[0] == '-') {
          sign = -sign;
          terms.emplace_back(sign * pending_coef, tk.substr(1));
        } else {
          terms.emplace_back(sign * pending_coef, tk);
        }
        reset_term();
        break;
      }
    }
  }
  if (part != Part::done) throw LpParseError("lp: missing End");

  BinaryProgram bp;
  std::unordered_map<std::string, std::int32_t> index;
  for (const auto& name : binaries) {
    if (index.count(name)) throw LpParseError("lp: duplicate binary " + name);
    index.emplace(name, bp.add_variable(name, 0.0));
  }
  auto lookup = [&](const std::string& name) {
    const auto it = index.find(name);
    if (it == index.end()) throw LpParseError("lp: undeclared variable " + name);
    return it->second;
  };
  for (const auto& [c, name] : objective) bp.variables[static_cast<std::size_t>(lookup(name))].objective += c;
  for (auto& r : rows) {
    std::vector<Term> terms;
    for (const auto& [c, name] : r.terms) {
      if (c != 0) terms.push_back({lookup(name), static_cast<std::int32_t>(c)});
    }
    bp.add_row(r.name, std::move(terms), r.sense, static_cast<std::int32_t>(r.rhs));
  }
  return bp;
}

inline BinaryProgram parse_lp(const std::string& text) {
  std::istringstream s(text);
  return parse_lp(s);
}

// "name value" per variable.
inline void write_solution(std::ostream& out, const BinaryProgram& bp,
                           const std::vector<std::uint8_t>& values) {
  for (std::size_t i = 0; i < bp.variables.size(); ++i) {
    out << bp.variables[i].name << ' ' << int(values[i]) << '\n';
  }
}

}  // namespace ucmtrack
