#include "dchoice/maxflow.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>

namespace dchoice {

MaxFlow::MaxFlow(std::size_t nodes) : adj_(nodes), level_(nodes), next_(nodes) {}

std::size_t MaxFlow::add_edge(std::size_t from, std::size_t to, double capacity) {
  if (from >= adj_.size() || to >= adj_.size()) throw std::invalid_argument("MaxFlow: node out of range");
  const std::size_t id = edges_.size();
  edges_.push_back({to, capacity, 0.0});
  edges_.push_back({from, 0.0, 0.0});
  adj_[from].push_back(id);
  adj_[to].push_back(id + 1);
  return id;
}

void MaxFlow::set_capacity(std::size_t edge, double capacity) { edges_.at(edge).cap = capacity; }

double MaxFlow::flow_on(std::size_t edge) const { return edges_.at(edge).flow; }

void MaxFlow::reset_flow() {
  for (auto& e : edges_) e.flow = 0.0;
  value_ = 0.0;
}

bool MaxFlow::bfs(std::size_t s, std::size_t t, double eps) {
  std::fill(level_.begin(), level_.end(), -1);
  std::queue<std::size_t> q;
  level_[s] = 0;
  q.push(s);
  while (!q.empty()) {
    auto v = q.front();
    q.pop();
    for (auto id : adj_[v]) {
      const auto& e = edges_[id];
      if (level_[e.to] < 0 && e.cap - e.flow > eps) {
        level_[e.to] = level_[v] + 1;
        q.push(e.to);
      }
    }
  }
  return level_[t] >= 0;
}

double MaxFlow::dfs(std::size_t v, std::size_t t, double pushed, double eps) {
  if (v == t) return pushed;
  for (auto& i = next_[v]; i < adj_[v].size(); ++i) {
    const auto id = adj_[v][i];
    auto& e = edges_[id];
    const double residual = e.cap - e.flow;
    if (level_[e.to] != level_[v] + 1 || residual <= eps) continue;
    const double got = dfs(e.to, t, std::min(pushed, residual), eps);
    if (got > 0.0) {
      e.flow += got;
      edges_[id ^ 1].flow -= got;
      return got;
    }
  }
  return 0.0;
}

double MaxFlow::run(std::size_t source, std::size_t sink, double eps) {
  while (bfs(source, sink, eps)) {
    std::fill(next_.begin(), next_.end(), 0);
    while (double f = dfs(source, sink, std::numeric_limits<double>::infinity(), eps)) value_ += f;
  }
  return value_;
}

std::vector<char> MaxFlow::source_side(std::size_t source, double eps) const {
  std::vector<char> seen(adj_.size(), 0);
  std::vector<std::size_t> stack{source};
  seen[source] = 1;
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    for (auto id : adj_[v]) {
      const auto& e = edges_[id];
      if (!seen[e.to] && e.cap - e.flow > eps) {
        seen[e.to] = 1;
        stack.push_back(e.to);
      }
    }
  }
  return seen;
}

}  // namespace dchoice
