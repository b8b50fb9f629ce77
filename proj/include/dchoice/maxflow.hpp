#pragma once

#include <cstddef>
#include <vector>

namespace dchoice {

/// Dinic max-flow on real capacities. Edges can be re-capacitated and the
/// flow reset, so one graph serves a whole bisection or parametric search.
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t nodes);

  /// Returns the edge id.
  std::size_t add_edge(std::size_t from, std::size_t to, double capacity);
  void set_capacity(std::size_t edge, double capacity);
  double flow_on(std::size_t edge) const;
  void reset_flow();

  /// Augments from the current flow; returns the total flow value. Residual
  /// capacities at or below eps are treated as saturated.
  double run(std::size_t source, std::size_t sink, double eps = 1e-13);

  /// After run(): nodes reachable from the source in the residual graph.
  std::vector<char> source_side(std::size_t source, double eps = 1e-13) const;

 private:
  struct Edge {
    std::size_t to;
    double cap;
    double flow;
  };
  bool bfs(std::size_t s, std::size_t t, double eps);
  double dfs(std::size_t v, std::size_t t, double pushed, double eps);

  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
  double value_ = 0.0;
};

}  // namespace dchoice
