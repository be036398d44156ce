#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dmc/core/time_grid.hpp"
#include "dmc/core/types.hpp"

namespace dmc {

/// State samples on consecutive grid nodes first_node .. last_node().
/// Forward runs start at -delay_steps (history attached); adjoint runs end at
/// n_steps + delay_steps.
struct Trajectory {
  TimeGrid grid;
  int first_node = 0;
  Mat values;  // dim x node count

  int dim() const { return static_cast<int>(values.rows()); }
  int node_count() const { return static_cast<int>(values.cols()); }
  int last_node() const { return first_node + node_count() - 1; }
  bool has_node(int k) const { return k >= first_node && k <= last_node(); }

  auto at(int k) { return values.col(k - first_node); }
  auto at(int k) const { return values.col(k - first_node); }

  const double* data_at(int k) const {
    return values.data() + static_cast<Eigen::Index>(k - first_node) * values.rows();
  }

  /// Final state sample at node n_steps.
  Vec final_state() const { return at(grid.n_steps); }

  /// CSV with header "t,<prefix>_1,...,<prefix>_n", one row per node.
  void write_csv(std::ostream& os, const std::string& prefix = "y") const;
};

}  // namespace dmc
