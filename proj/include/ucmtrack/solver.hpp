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

// Exact depth-first branch-and-bound for BinaryProgram.
//
// The program is split into independent blocks (variables connected through
// rows) that are searched one after another. Every search node runs bound
// propagation on the rows and prunes with a combinatorial upper bound: the
// fixed objective plus, per selection group, its best free positive members
// up to the group's capacity, aggregated over the group forest when it is
// laminar and taken from the cheapest cover of each stage. The bound is kept
// up to date incrementally as variables are fixed and released.

#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "ucmtrack/binary_program.hpp"

namespace ucmtrack {

enum class SolveStatus : std::uint8_t { optimal, feasible, infeasible, unknown };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::feasible: return "feasible";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unknown: return "unknown";
  }
  return "?";
}

struct SolveOptions {
  double time_limit_seconds = std::numeric_limits<double>::infinity();
  double gap_tolerance = 0.0;
};

struct Solution {
  std::vector<std::uint8_t> values;
  double objective = 0;
  SolveStatus status = SolveStatus::unknown;
  std::uint64_t nodes = 0;
  double wall_seconds = 0;
};

namespace detail {

class BranchAndBound {
 public:
  BranchAndBound(const BinaryProgram& bp, const SolveOptions& opts)
      : bp_(bp), opts_(opts), n_(bp.size()) {
    value_.assign(n_, -1);
    var_rows_.resize(n_);
    row_min_.assign(bp.rows.size(), 0);
    row_max_.assign(bp.rows.size(), 0);
    queued_.assign(bp.rows.size(), 0);
    for (std::size_t r = 0; r < bp.rows.size(); ++r) {
      for (const auto& t : bp.rows[r].terms) {
        var_rows_[static_cast<std::size_t>(t.var)].push_back({static_cast<std::int32_t>(r), t.coef});
        row_min_[r] += std::min(0, t.coef);
        row_max_[r] += std::max(0, t.coef);
      }
    }
    group_of_member_.assign(n_, -1);
    for (std::size_t g = 0; g < bp.groups.size(); ++g) {
      for (std::int32_t m : bp.groups[g].members) group_of_member_[static_cast<std::size_t>(m)] = static_cast<std::int32_t>(g);
    }
    build_blocks();
  }

  Solution run() {
    const auto start = std::chrono::steady_clock::now();
    start_ = start;
    Solution sol;
    for (std::size_t r = 0; r < bp_.rows.size(); ++r) enqueue(static_cast<std::int32_t>(r));
    if (!propagate()) {
      sol.status = SolveStatus::infeasible;
      sol.values.assign(n_, 0);
      sol.wall_seconds = elapsed();
      return sol;
    }
    best_.assign(n_, 0);
    for (std::size_t i = 0; i < n_; ++i) {
      if (value_[i] >= 0) best_[i] = static_cast<std::uint8_t>(value_[i]);
    }
    bool proven = true;
    bool infeasible = false;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const BlockResult res = search_block(b);
      if (!res.found) {
        infeasible = res.exhausted;
        proven = false;
        if (infeasible) break;
        continue;
      }
      if (!res.exhausted) proven = false;
    }
    sol.nodes = nodes_;
    sol.wall_seconds = elapsed();
    if (infeasible) {
      sol.status = SolveStatus::infeasible;
      sol.values.assign(n_, 0);
      return sol;
    }
    sol.values = best_;
    sol.objective = bp_.evaluate(sol.values);
    if (proven) sol.status = SolveStatus::optimal;
    else sol.status = bp_.first_violation(sol.values) ? SolveStatus::unknown : SolveStatus::feasible;
    return sol;
  }

 private:
  struct Block {
    std::vector<std::int32_t> order;          // branching order
    std::vector<std::int32_t> loose_positive; // positive vars outside any group
  };
  struct BlockResult {
    bool found = false;
    bool exhausted = false;
  };
  struct Decision {
    std::size_t pos;
    std::int32_t var;
    std::int8_t second;
    bool tried_second;
    std::size_t mark;
  };

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  void build_blocks() {
    std::vector<std::int32_t> root(n_);
    std::iota(root.begin(), root.end(), 0);
    auto find = [&](std::int32_t x) {
      while (root[static_cast<std::size_t>(x)] != x) {
        root[static_cast<std::size_t>(x)] = root[static_cast<std::size_t>(root[static_cast<std::size_t>(x)])];
        x = root[static_cast<std::size_t>(x)];
      }
      return x;
    };
    for (const auto& row : bp_.rows) {
      for (std::size_t i = 1; i < row.terms.size(); ++i) {
        const auto a = find(row.terms[0].var), b = find(row.terms[i].var);
        if (a != b) root[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
      }
    }
    // Groups must live inside one block for their bound to be local.
    for (const auto& g : bp_.groups) {
      for (std::int32_t m : g.members) {
        const auto a = find(g.selector), b = find(m);
        if (a != b) root[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
      }
      if (bp_.groups_laminar && g.parent >= 0) {
        const auto a = find(g.selector), b = find(bp_.groups[static_cast<std::size_t>(g.parent)].selector);
        if (a != b) root[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
      }
    }
    std::vector<std::int32_t> block_of_root(n_, -1);
    block_of_var_.assign(n_, 0);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto r = static_cast<std::size_t>(find(static_cast<std::int32_t>(i)));
      if (block_of_root[r] < 0) {
        block_of_root[r] = static_cast<std::int32_t>(blocks_.size());
        blocks_.emplace_back();
      }
      block_of_var_[i] = block_of_root[r];
    }
    std::vector<std::int32_t> order(n_);
    std::iota(order.begin(), order.end(), 0);
    // Rewarded variables first, strongest first; then free ones; penalized
    // variables last, since they are usually implied by the others.
    auto sign_rank = [](double c) { return c > 0 ? 0 : c == 0 ? 1 : 2; };
    std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
      const double ca = bp_.variables[static_cast<std::size_t>(a)].objective;
      const double cb = bp_.variables[static_cast<std::size_t>(b)].objective;
      if (sign_rank(ca) != sign_rank(cb)) return sign_rank(ca) < sign_rank(cb);
      if (std::abs(ca) != std::abs(cb)) return std::abs(ca) > std::abs(cb);
      return bp_.variables[static_cast<std::size_t>(a)].name < bp_.variables[static_cast<std::size_t>(b)].name;
    });
    for (std::int32_t v : order) blocks_[static_cast<std::size_t>(block_of_var_[static_cast<std::size_t>(v)])].order.push_back(v);
    for (std::size_t i = 0; i < n_; ++i) {
      if (bp_.variables[i].objective > 0 && group_of_member_[i] < 0) {
        blocks_[static_cast<std::size_t>(block_of_var_[i])].loose_positive.push_back(static_cast<std::int32_t>(i));
      }
    }
    std::vector<std::size_t> depth(bp_.groups.size(), 0);
    if (bp_.groups_laminar) {
      for (std::size_t g = 0; g < bp_.groups.size(); ++g) {
        for (std::int32_t p = bp_.groups[g].parent; p >= 0; p = bp_.groups[static_cast<std::size_t>(p)].parent) ++depth[g];
      }
    }
    std::vector<std::int32_t> gorder(bp_.groups.size());
    std::iota(gorder.begin(), gorder.end(), 0);
    std::stable_sort(gorder.begin(), gorder.end(), [&](std::int32_t a, std::int32_t b) {
      return depth[static_cast<std::size_t>(a)] > depth[static_cast<std::size_t>(b)];
    });
    std::map<std::tuple<std::int32_t, std::int32_t, std::int32_t>, std::size_t> slot_of;  // (block, stage, cover)
    std::map<std::pair<std::int32_t, std::int32_t>, std::size_t> stage_of;               // (block, stage)
    slot_of_group_.assign(bp_.groups.size(), -1);
    groups_of_var_.assign(n_, {});
    for (std::int32_t g : gorder) {
      const auto& grp = bp_.groups[static_cast<std::size_t>(g)];
      groups_of_var_[static_cast<std::size_t>(grp.selector)].push_back(g);
      for (std::int32_t m : grp.members) {
        if (m != grp.selector) groups_of_var_[static_cast<std::size_t>(m)].push_back(g);
      }
      if (grp.stage < 0) continue;
      const std::int32_t blk = block_of_var_[static_cast<std::size_t>(grp.selector)];
      const auto [it, fresh] = slot_of.emplace(std::tuple(blk, grp.stage, grp.cover), slot_sum_.size());
      if (fresh) {
        const auto [st, new_stage] = stage_of.emplace(std::pair(blk, grp.stage), stage_slots_.size());
        if (new_stage) stage_slots_.emplace_back();
        stage_slots_[st->second].push_back(it->second);
        stage_of_slot_.push_back(st->second);
        slot_sum_.push_back(0);
      }
      slot_of_group_[static_cast<std::size_t>(g)] = static_cast<std::int32_t>(it->second);
    }
    stage_min_.assign(stage_slots_.size(), 0.0);
    block_fixed_.assign(blocks_.size(), 0.0);
    block_free_.assign(blocks_.size(), 0.0);
    group_value_.assign(bp_.groups.size(), 0.0);
    group_best_.assign(bp_.groups.size(), 0.0);
    group_child_sum_.assign(bp_.groups.size(), 0.0);
    loose_.assign(n_, 0);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      for (std::int32_t v : blocks_[b].loose_positive) {
        loose_[static_cast<std::size_t>(v)] = 1;
        block_free_[b] += bp_.variables[static_cast<std::size_t>(v)].objective;
      }
    }
    for (std::int32_t g : gorder) refresh(g);
  }

  // Recomputes one group's value and passes the change up to its block.
  void refresh(std::int32_t g) {
    auto gi = static_cast<std::size_t>(g);
    group_value_[gi] = group_value(bp_.groups[gi]);
    while (true) {
      const double best = bp_.groups_laminar ? std::max(group_value_[gi], group_child_sum_[gi]) : group_value_[gi];
      const double delta = best - group_best_[gi];
      if (delta == 0) return;
      group_best_[gi] = best;
      const auto& grp = bp_.groups[gi];
      if (bp_.groups_laminar && grp.parent >= 0) {
        gi = static_cast<std::size_t>(grp.parent);
        group_child_sum_[gi] += delta;
        continue;
      }
      const auto b = static_cast<std::size_t>(block_of_var_[static_cast<std::size_t>(grp.selector)]);
      const std::int32_t slot = slot_of_group_[gi];
      if (slot < 0) {
        block_free_[b] += delta;
        return;
      }
      slot_sum_[static_cast<std::size_t>(slot)] += delta;
      const std::size_t st = stage_of_slot_[static_cast<std::size_t>(slot)];
      double m = std::numeric_limits<double>::infinity();
      for (std::size_t k : stage_slots_[st]) m = std::min(m, slot_sum_[k]);
      block_free_[b] += m - stage_min_[st];
      stage_min_[st] = m;
      return;
    }
  }

  void touch(std::size_t i, int sign) {
    if (loose_[i]) block_free_[static_cast<std::size_t>(block_of_var_[i])] += sign * bp_.variables[i].objective;
    for (std::int32_t g : groups_of_var_[i]) refresh(g);
  }

  void enqueue(std::int32_t r) {
    if (!queued_[static_cast<std::size_t>(r)]) {
      queued_[static_cast<std::size_t>(r)] = 1;
      queue_.push_back(r);
    }
  }

  bool fix(std::int32_t var, std::int8_t v) {
    const auto i = static_cast<std::size_t>(var);
    if (value_[i] >= 0) return value_[i] == v;
    value_[i] = v;
    trail_.push_back(var);
    if (v) block_fixed_[static_cast<std::size_t>(block_of_var_[i])] += bp_.variables[i].objective;
    touch(i, -1);
    for (auto [r, a] : var_rows_[i]) {
      const auto ri = static_cast<std::size_t>(r);
      row_min_[ri] += a * v - std::min(0, static_cast<int>(a));
      row_max_[ri] += a * v - std::max(0, static_cast<int>(a));
      enqueue(r);
    }
    return true;
  }

  void undo_to(std::size_t mark) {
    while (trail_.size() > mark) {
      const std::int32_t var = trail_.back();
      trail_.pop_back();
      const auto i = static_cast<std::size_t>(var);
      const std::int8_t v = value_[i];
      if (v) block_fixed_[static_cast<std::size_t>(block_of_var_[i])] -= bp_.variables[i].objective;
      for (auto [r, a] : var_rows_[i]) {
        const auto ri = static_cast<std::size_t>(r);
        row_min_[ri] -= a * v - std::min(0, static_cast<int>(a));
        row_max_[ri] -= a * v - std::max(0, static_cast<int>(a));
      }
      value_[i] = -1;
      touch(i, 1);
    }
  }

  bool propagate() {
    std::size_t head = 0;
    bool ok = true;
    while (ok && head < queue_.size()) {
      const std::int32_t r = queue_[head++];
      queued_[static_cast<std::size_t>(r)] = 0;
      const Row& row = bp_.rows[static_cast<std::size_t>(r)];
      const auto ri = static_cast<std::size_t>(r);
      const bool upper = row.sense != Sense::ge;  // activity <= rhs applies
      const bool lower = row.sense != Sense::le;  // activity >= rhs applies
      if ((upper && row_min_[ri] > row.rhs) || (lower && row_max_[ri] < row.rhs)) {
        ok = false;
        break;
      }
      const std::int64_t slack_up = row.rhs - row_min_[ri];
      const std::int64_t slack_down = row_max_[ri] - row.rhs;
      for (const auto& t : row.terms) {
        if (value_[static_cast<std::size_t>(t.var)] >= 0) continue;
        const std::int64_t mag = std::abs(t.coef);
        std::int8_t forced = -1;
        if (upper && mag > slack_up) forced = t.coef > 0 ? 0 : 1;
        if (lower && mag > slack_down) {
          const std::int8_t f = t.coef > 0 ? 1 : 0;
          if (forced >= 0 && forced != f) {
            ok = false;
            break;
          }
          forced = f;
        }
        if (forced >= 0 && !fix(t.var, forced)) {
          ok = false;
          break;
        }
      }
    }
    for (std::size_t k = head; k < queue_.size(); ++k) queued_[static_cast<std::size_t>(queue_[k])] = 0;
    queue_.clear();
    return ok;
  }

  // Largest total of the free members one group may still add.
  double group_value(const SelectionGroup& grp) const {
    if (value_[static_cast<std::size_t>(grp.selector)] == 0) return 0;
    std::int32_t room = grp.capacity;
    for (std::int32_t v : grp.members) {
      if (value_[static_cast<std::size_t>(v)] == 1) --room;
    }
    if (room <= 0) return 0;
    std::array<double, 4> top{};  // descending, first `room` entries used
    if (static_cast<std::size_t>(room) > top.size()) {
      double sum = 0;
      for (std::int32_t v : grp.members) {
        if (value_[static_cast<std::size_t>(v)] < 0) sum += std::max(0.0, bp_.variables[static_cast<std::size_t>(v)].objective);
      }
      return sum;
    }
    const auto keep = static_cast<std::size_t>(room);
    for (std::int32_t v : grp.members) {
      if (value_[static_cast<std::size_t>(v)] >= 0) continue;
      double c = bp_.variables[static_cast<std::size_t>(v)].objective;
      for (std::size_t k = 0; k < keep && c > 0; ++k) {
        if (c > top[k]) std::swap(c, top[k]);
      }
    }
    double sum = 0;
    for (std::size_t k = 0; k < keep; ++k) sum += top[k];
    return sum;
  }

  double bound(std::size_t b) const { return block_fixed_[b] + block_free_[b]; }

  BlockResult search_block(std::size_t b) {
    const Block& block = blocks_[b];
    BlockResult res;
    double incumbent = -std::numeric_limits<double>::infinity();
    const std::size_t baseline = trail_.size();
    std::vector<Decision> stack;
    bool ok = true;
    bool first_only = stopped_;
    while (true) {
      ++nodes_;
      if ((nodes_ & 1023) == 0 && !stopped_ && elapsed() > opts_.time_limit_seconds) {
        stopped_ = true;
        first_only = true;
        if (res.found) break;
      }
      // The slack absorbs rounding in the incrementally maintained bound.
      if (ok && res.found && bound(b) <= incumbent + opts_.gap_tolerance + 1e-9 * (1 + std::abs(incumbent))) ok = false;
      if (ok) {
        std::size_t pos = stack.empty() ? 0 : stack.back().pos + 1;
        while (pos < block.order.size() && value_[static_cast<std::size_t>(block.order[pos])] >= 0) ++pos;
        if (pos == block.order.size()) {
          if (!res.found || block_fixed_[b] > incumbent) {
            incumbent = block_fixed_[b];
            res.found = true;
            for (std::int32_t v : block.order) best_[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(value_[static_cast<std::size_t>(v)]);
          }
          if (first_only) break;
          ok = false;
        } else {
          const std::int32_t var = block.order[pos];
          const double c = bp_.variables[static_cast<std::size_t>(var)].objective;
          const std::int8_t first = c > 0 ? 1 : 0;
          stack.push_back({pos, var, static_cast<std::int8_t>(1 - first), false, trail_.size()});
          ok = fix(var, first) && propagate();
          continue;
        }
      }
      // Backtrack to the deepest decision with an untried branch.
      bool resumed = false;
      while (!stack.empty()) {
        Decision& d = stack.back();
        undo_to(d.mark);
        if (!d.tried_second) {
          d.tried_second = true;
          ok = fix(d.var, d.second) && propagate();
          resumed = true;
          break;
        }
        stack.pop_back();
      }
      if (!resumed) {
        res.exhausted = true;
        break;
      }
    }
    undo_to(baseline);
    if (stopped_ && !res.exhausted) res.exhausted = false;
    return res;
  }

  const BinaryProgram& bp_;
  SolveOptions opts_;
  std::size_t n_;
  std::vector<std::int8_t> value_;
  std::vector<std::vector<std::pair<std::int32_t, std::int32_t>>> var_rows_;
  std::vector<std::int64_t> row_min_, row_max_;
  std::vector<char> queued_;
  std::vector<std::int32_t> queue_;
  std::vector<std::int32_t> trail_;
  std::vector<std::int32_t> group_of_member_;
  std::vector<std::int32_t> block_of_var_;
  std::vector<Block> blocks_;
  std::vector<double> block_fixed_;
  std::vector<double> block_free_;       // bound on what free variables may add
  std::vector<double> group_value_;      // own value of each group
  std::vector<double> group_best_;       // value including laminar children
  std::vector<double> group_child_sum_;
  std::vector<std::vector<std::int32_t>> groups_of_var_;
  std::vector<char> loose_;
  std::vector<std::int32_t> slot_of_group_;
  std::vector<double> slot_sum_;
  std::vector<std::size_t> stage_of_slot_;
  std::vector<std::vector<std::size_t>> stage_slots_;
  std::vector<double> stage_min_;
  std::vector<std::uint8_t> best_;
  std::uint64_t nodes_ = 0;
  bool stopped_ = false;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

inline Solution solve(const BinaryProgram& program, const SolveOptions& options = {}) {
  return detail::BranchAndBound(program, options).run();
}

}  // namespace ucmtrack
