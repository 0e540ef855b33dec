#pragma once

#include <algorithm>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dgvf {

// Undirected simple communication graph on robots 0..N-1.
class Topology {
 public:
  Topology() = default;

  Topology(int n, std::vector<std::pair<int, int>> edges) : n_(n) {
    if (n <= 0) throw std::invalid_argument("topology needs at least one robot");
    adj_.resize(static_cast<std::size_t>(n));
    std::set<std::pair<int, int>> seen;
    for (auto [i, j] : edges) {
      if (i == j) throw std::invalid_argument("self-loop edge");
      if (i < 0 || j < 0 || i >= n || j >= n) throw std::invalid_argument("edge endpoint out of range");
      auto key = std::minmax(i, j);
      if (!seen.insert(key).second) throw std::invalid_argument("duplicate edge");
      edges_.push_back(key);
      adj_[static_cast<std::size_t>(i)].push_back(j);
      adj_[static_cast<std::size_t>(j)].push_back(i);
    }
    for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
    std::sort(edges_.begin(), edges_.end());
  }

  static Topology ring(int n) {
    std::vector<std::pair<int, int>> e;
    if (n == 2) {
      e.push_back({0, 1});
    } else if (n > 2) {
      for (int i = 0; i < n; ++i) e.push_back({i, (i + 1) % n});
    }
    return Topology(n, std::move(e));
  }

  static Topology complete(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) e.push_back({i, j});
    return Topology(n, std::move(e));
  }

  int robots() const { return n_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int i) const { return adj_.at(static_cast<std::size_t>(i)); }

  // L = D - A; symmetric, positive semidefinite, zero row sums.
  std::vector<std::vector<double>> laplacian() const {
    std::vector<std::vector<double>> L(static_cast<std::size_t>(n_), std::vector<double>(static_cast<std::size_t>(n_), 0.0));
    for (auto [i, j] : edges_) {
      L[i][i] += 1.0;
      L[j][j] += 1.0;
      L[i][j] -= 1.0;
      L[j][i] -= 1.0;
    }
    return L;
  }

  bool connected() const {
    if (n_ <= 1) return true;
    std::vector<char> seen(static_cast<std::size_t>(n_), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int visited = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int u : adj_[static_cast<std::size_t>(v)]) {
        if (!seen[static_cast<std::size_t>(u)]) {
          seen[static_cast<std::size_t>(u)] = 1;
          ++visited;
          stack.push_back(u);
        }
      }
    }
    return visited == n_;
  }

 private:
  int n_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adj_;
};

// Reference virtual-coordinate configurations w1*, w2*. Per-edge offsets are
// derived as differences of the references, which makes them antisymmetric
// and cycle-consistent by construction.
struct OffsetTable {
  std::vector<double> w1_ref;
  std::vector<double> w2_ref;

  double delta1(int i, int j) const { return w1_ref.at(i) - w1_ref.at(j); }
  double delta2(int i, int j) const { return w2_ref.at(i) - w2_ref.at(j); }
};

// Consensus residuals c1, c2 for robot i: the negated sum over its neighbors
// of (w_i - w_j - Delta_ij). Templated on the vector type so tests can pass
// an access-recording container and verify that only neighbor entries (plus
// robot i's own) are touched.
template <class V1, class V2>
std::pair<double, double> coordination_residuals(const Topology& topo, const OffsetTable& offsets,
                                                 const V1& w1, const V2& w2, int i) {
  if (i < 0 || i >= topo.robots()) throw std::invalid_argument("robot index out of range");
  double c1 = 0.0, c2 = 0.0;
  const double wi1 = w1[static_cast<std::size_t>(i)];
  const double wi2 = w2[static_cast<std::size_t>(i)];
  for (int j : topo.neighbors(i)) {
    c1 -= wi1 - w1[static_cast<std::size_t>(j)] - offsets.delta1(i, j);
    c2 -= wi2 - w2[static_cast<std::size_t>(j)] - offsets.delta2(i, j);
  }
  return {c1, c2};
}

}  // namespace dgvf
