/* Copyright 2026 The Trackcast Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Min-cost bipartite matching and the query-supervision protocol built on it.
//
// hungarian() maximizes matching cardinality over pairs with finite cost,
// minimizes total cost among those matchings, and breaks remaining ties by
// returning the lexicographically smallest (row, col) pair list.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <utility>
#include <vector>

#include "trackcast/common.hpp"

namespace trackcast {

inline constexpr double kForbiddenCost = std::numeric_limits<double>::infinity();

// Rectangular cost matrix; rows are candidates, columns are targets.
// Entries are nonnegative reals or +inf for forbidden pairs.
class CostMatrix {
 public:
  CostMatrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) {
      throw InvalidInputError("CostMatrix: negative dimensions");
    }
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double at(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  void validate() const {
    for (double v : data_) {
      if (std::isnan(v)) throw InvalidInputError("CostMatrix: NaN entry");
      if (v < 0.0) throw InvalidInputError("CostMatrix: negative entry");
    }
  }

 private:
  int rows_;
  int cols_;
  std::vector<double> data_;
};

// Partial injection between rows and columns plus its total cost.
struct MatchResult {
  std::vector<std::pair<int, int>> pairs;  // sorted by row index
  std::vector<int> unmatched_rows;
  std::vector<int> unmatched_cols;
  double total_cost = 0.0;
};

namespace detail {

// Kuhn-Munkres with potentials on a square matrix of finite costs.
// Returns the column assigned to each row.
inline std::vector<int> solve_square(const std::vector<std::vector<double>>& a) {
  const int n = static_cast<int>(a.size());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

struct SubSolution {
  int cardinality = 0;
  double cost = 0.0;
};

// Optimum (max cardinality, then min cost) over the submatrix restricted to
// `rows` x `cols`. Forbidden entries are replaced by a sentinel larger than
// the sum of all finite costs so that cardinality dominates cost.
inline SubSolution solve_subproblem(const CostMatrix& cost,
                                    const std::vector<int>& rows,
                                    const std::vector<int>& cols) {
  if (rows.empty() || cols.empty()) return {};
  double finite_sum = 0.0;
  for (int r : rows) {
    for (int c : cols) {
      const double v = cost.at(r, c);
      if (std::isfinite(v)) finite_sum += v;
    }
  }
  const double sentinel = finite_sum + 1.0;
  const int n = static_cast<int>(std::max(rows.size(), cols.size()));
  std::vector<std::vector<double>> padded(n, std::vector<double>(n, sentinel));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double v = cost.at(rows[i], cols[j]);
      if (std::isfinite(v)) padded[i][j] = v;
    }
  }
  const std::vector<int> row_to_col = solve_square(padded);
  SubSolution out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int j = row_to_col[i];
    if (j < 0 || j >= static_cast<int>(cols.size())) continue;
    const double v = cost.at(rows[i], cols[j]);
    if (std::isfinite(v)) {
      ++out.cardinality;
      out.cost += v;
    }
  }
  return out;
}

}  // namespace detail

// Min-cost assignment over all partial injections; a pair stays unmatched
// only when every remaining option is forbidden. Ties in total cost resolve
// to the lexicographically smallest pair list.
inline MatchResult hungarian(const CostMatrix& cost) {
  cost.validate();
  MatchResult result;
  const int n_rows = cost.rows();
  const int n_cols = cost.cols();
  if (n_rows == 0 || n_cols == 0) {
    for (int r = 0; r < n_rows; ++r) result.unmatched_rows.push_back(r);
    for (int c = 0; c < n_cols; ++c) result.unmatched_cols.push_back(c);
    return result;
  }

  std::vector<int> all_rows(n_rows), all_cols(n_cols);
  for (int r = 0; r < n_rows; ++r) all_rows[r] = r;
  for (int c = 0; c < n_cols; ++c) all_cols[c] = c;
  const detail::SubSolution best = detail::solve_subproblem(cost, all_rows, all_cols);

  // Fix pairs row by row, smallest feasible column first, keeping the
  // remainder solvable at the optimal cardinality and cost.
  std::vector<int> available = all_cols;
  int fixed_count = 0;
  double fixed_cost = 0.0;
  const auto tolerance = [&](double reference) {
    return 1e-9 * std::max(1.0, std::abs(reference));
  };
  for (int r = 0; r < n_rows; ++r) {
    std::vector<int> remaining_rows(all_rows.begin() + r + 1, all_rows.end());
    bool placed = false;
    for (std::size_t ci = 0; ci < available.size() && !placed; ++ci) {
      const int c = available[ci];
      const double v = cost.at(r, c);
      if (!std::isfinite(v)) continue;
      std::vector<int> remaining_cols;
      remaining_cols.reserve(available.size() - 1);
      for (int other : available) {
        if (other != c) remaining_cols.push_back(other);
      }
      const detail::SubSolution rest =
          detail::solve_subproblem(cost, remaining_rows, remaining_cols);
      if (fixed_count + 1 + rest.cardinality == best.cardinality &&
          std::abs(fixed_cost + v + rest.cost - best.cost) <=
              tolerance(best.cost)) {
        result.pairs.emplace_back(r, c);
        available.erase(available.begin() + ci);
        ++fixed_count;
        fixed_cost += v;
        placed = true;
      }
    }
    if (!placed) {
      const detail::SubSolution rest =
          detail::solve_subproblem(cost, remaining_rows, available);
      if (fixed_count + rest.cardinality != best.cardinality ||
          std::abs(fixed_cost + rest.cost - best.cost) > tolerance(best.cost)) {
        throw InternalError("hungarian: lexicographic fixing lost the optimum");
      }
      result.unmatched_rows.push_back(r);
    }
  }

  std::set<int> used_cols;
  for (const auto& [r, c] : result.pairs) {
    result.total_cost += cost.at(r, c);
    used_cols.insert(c);
  }
  for (int c = 0; c < n_cols; ++c) {
    if (!used_cols.count(c)) result.unmatched_cols.push_back(c);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Matching costs and supervision.

// Class indices used by query detections and targets.
inline constexpr int kClassVehicle = 0;
inline constexpr int kClassPedestrian = 1;
inline constexpr int kClassEmpty = 2;  // "no object"
inline constexpr int kNumClasses = 3;

// Box parameterization (x, y, z, l, w, h); yaw rides along but is excluded
// from the L1 distance unless explicitly requested.
struct BoxParams {
  double x = 0.0, y = 0.0, z = 0.0;
  double length = 0.0, width = 0.0, height = 0.0;
  double yaw = 0.0;
};

inline double wrap_angle_difference(double a, double b) {
  double d = std::fmod(a - b + kPi, 2.0 * kPi);
  if (d < 0.0) d += 2.0 * kPi;
  return d - kPi;
}

inline double l1_box_distance(const BoxParams& a, const BoxParams& b,
                              bool include_yaw = false) {
  double d = std::abs(a.x - b.x) + std::abs(a.y - b.y) + std::abs(a.z - b.z) +
             std::abs(a.length - b.length) + std::abs(a.width - b.width) +
             std::abs(a.height - b.height);
  if (include_yaw) d += std::abs(wrap_angle_difference(a.yaw, b.yaw));
  return d;
}

// Decoded output of one query: class distribution plus box parameters.
struct QueryDetection {
  Eigen::Vector3d class_probs = Eigen::Vector3d::Zero();
  BoxParams box;
};

// One side of a supervision target: class label and box.
struct AgentTarget {
  int class_index = kClassEmpty;
  BoxParams box;
};

// Pairwise matching cost: -p_hat(c) + L1(box) for real targets, 0 for the
// empty class.
inline double detr_match_cost(const QueryDetection& pred, const AgentTarget& gt,
                              bool include_yaw = false) {
  if (std::abs(pred.class_probs.sum() - 1.0) > 1e-6) {
    throw InvalidInputError("detr_match_cost: class probabilities must sum to 1");
  }
  if (gt.class_index == kClassEmpty) return 0.0;
  if (gt.class_index < 0 || gt.class_index >= kNumClasses) {
    throw InvalidInputError("detr_match_cost: class index out of range");
  }
  return -pred.class_probs[gt.class_index] +
         l1_box_distance(pred.box, gt.box, include_yaw);
}

// Ground-truth agent visible at one step, as seen by supervision.
struct GtAgentFrame {
  std::int64_t track_id = -1;
  int class_index = kClassVehicle;
  BoxParams box;
};

// Per-query supervision label.
struct QueryLabel {
  bool matched = false;
  std::int64_t track_id = -1;   // valid when matched
  AgentTarget target;           // this-frame class and box when matched
  bool reinit = false;          // empty label issued after a disappearance
};

struct SupervisionAssignment {
  std::vector<QueryLabel> labels;                // one per query
  std::vector<std::int64_t> unassigned_agents;   // new agents without a query

  static SupervisionAssignment initial(int n_queries) {
    SupervisionAssignment a;
    a.labels.resize(n_queries);
    return a;
  }

  int matched_count() const {
    int n = 0;
    for (const auto& l : labels) n += l.matched ? 1 : 0;
    return n;
  }
};

// Three-case assignment protocol: queries matched previously keep their agent
// while it persists; queries whose agent disappeared get an empty label and a
// reinit flag; empty queries are matched to newly appeared agents by min-cost
// matching over detr_match_cost.
inline SupervisionAssignment supervise_queries(
    const SupervisionAssignment& prev, const std::vector<QueryDetection>& decoded,
    const std::vector<GtAgentFrame>& gt_frame, bool include_yaw = false) {
  const int n_queries = static_cast<int>(prev.labels.size());
  if (static_cast<int>(decoded.size()) != n_queries) {
    throw InvalidInputError("supervise_queries: decoded output count mismatch");
  }

  std::set<std::int64_t> seen;
  for (const auto& label : prev.labels) {
    if (!label.matched) continue;
    if (!seen.insert(label.track_id).second) {
      throw InternalError("supervise_queries: duplicate prior track id");
    }
  }

  SupervisionAssignment next;
  next.labels.resize(n_queries);

  std::set<std::int64_t> claimed;
  const auto find_agent = [&](std::int64_t id) -> const GtAgentFrame* {
    for (const auto& agent : gt_frame) {
      if (agent.track_id == id) return &agent;
    }
    return nullptr;
  };

  // Case (a)/(b): previously matched queries.
  std::vector<int> empty_queries;
  for (int q = 0; q < n_queries; ++q) {
    const QueryLabel& before = prev.labels[q];
    if (!before.matched) {
      empty_queries.push_back(q);
      continue;
    }
    if (const GtAgentFrame* agent = find_agent(before.track_id)) {
      next.labels[q].matched = true;
      next.labels[q].track_id = agent->track_id;
      next.labels[q].target = {agent->class_index, agent->box};
      claimed.insert(agent->track_id);
    } else {
      next.labels[q].matched = false;
      next.labels[q].reinit = true;
    }
  }

  // Case (c): bipartite matching between empty queries and new agents.
  std::vector<const GtAgentFrame*> new_agents;
  for (const auto& agent : gt_frame) {
    if (!claimed.count(agent.track_id)) new_agents.push_back(&agent);
  }
  if (!empty_queries.empty() && !new_agents.empty()) {
    // detr_match_cost lies in [-1, inf); shift by +1 to satisfy the
    // nonnegativity invariant without changing the optimal assignment.
    CostMatrix cost(static_cast<int>(empty_queries.size()),
                    static_cast<int>(new_agents.size()));
    for (std::size_t i = 0; i < empty_queries.size(); ++i) {
      for (std::size_t j = 0; j < new_agents.size(); ++j) {
        const AgentTarget target{new_agents[j]->class_index, new_agents[j]->box};
        cost.at(static_cast<int>(i), static_cast<int>(j)) =
            detr_match_cost(decoded[empty_queries[i]], target, include_yaw) + 1.0;
      }
    }
    const MatchResult match = hungarian(cost);
    std::set<std::size_t> assigned_agents;
    for (const auto& [qi, aj] : match.pairs) {
      const int q = empty_queries[qi];
      const GtAgentFrame* agent = new_agents[aj];
      next.labels[q].matched = true;
      next.labels[q].track_id = agent->track_id;
      next.labels[q].target = {agent->class_index, agent->box};
      assigned_agents.insert(static_cast<std::size_t>(aj));
    }
    for (std::size_t j = 0; j < new_agents.size(); ++j) {
      if (!assigned_agents.count(j)) {
        next.unassigned_agents.push_back(new_agents[j]->track_id);
      }
    }
  } else {
    for (const auto* agent : new_agents) {
      next.unassigned_agents.push_back(agent->track_id);
    }
  }
  return next;
}

struct SupervisionLosses {
  double classification = 0.0;  // sum of -log p_hat(c_i) over all queries
  double coordinate = 0.0;      // sum of L1 box distances over matched queries
};

inline constexpr double kLogProbFloor = 1e-12;

// Classification loss over every query (empty labels score the empty class)
// and coordinate regression loss over matched queries.
inline SupervisionLosses supervision_losses(
    const SupervisionAssignment& assignment,
    const std::vector<QueryDetection>& decoded, bool include_yaw = false) {
  if (decoded.size() != assignment.labels.size()) {
    throw InvalidInputError("supervision_losses: missing decoded outputs");
  }
  SupervisionLosses losses;
  for (std::size_t q = 0; q < assignment.labels.size(); ++q) {
    const QueryLabel& label = assignment.labels[q];
    const int target_class = label.matched ? label.target.class_index : kClassEmpty;
    const double p = std::max(decoded[q].class_probs[target_class], kLogProbFloor);
    losses.classification += -std::log(p);
    if (label.matched) {
      losses.coordinate +=
          l1_box_distance(label.target.box, decoded[q].box, include_yaw);
    }
  }
  return losses;
}

}  // namespace trackcast
