#include <doctest.h>

#include <cmath>
#include <set>

#include "dgvf/graph.hpp"
#include "dgvf/random.hpp"
#include "oracles.hpp"

using namespace dgvf;

TEST_CASE("laplacian: path graph and complete graph") {
  const Topology path(3, {{0, 1}, {1, 2}});
  const auto L = path.laplacian();
  CHECK(L == std::vector<std::vector<double>>{{1, -1, 0}, {-1, 2, -1}, {0, -1, 1}});

  const auto K3 = Topology::complete(3).laplacian();
  CHECK(K3 == std::vector<std::vector<double>>{{2, -1, -1}, {-1, 2, -1}, {-1, -1, 2}});
}

TEST_CASE("laplacian structure: symmetric, zero row sums, rank N-1 when connected") {
  const Topology ring = Topology::ring(5);
  const auto L = ring.laplacian();
  for (int i = 0; i < 5; ++i) {
    double row = 0.0;
    for (int j = 0; j < 5; ++j) {
      row += L[i][j];
      CHECK(L[i][j] == L[j][i]);
    }
    CHECK(row == 0.0);
  }
  // zero eigenvalue has multiplicity 1 iff rank(L) == N - 1
  CHECK(oracle::matrix_rank(L) == 4);

  const Topology two_pairs(4, {{0, 1}, {2, 3}});
  CHECK(oracle::matrix_rank(two_pairs.laplacian()) == 2);  // two components
}

TEST_CASE("is_connected: anchors and a union-find oracle on random graphs") {
  CHECK(Topology::ring(5).connected());
  CHECK_FALSE(Topology(4, {{0, 1}, {2, 3}}).connected());
  CHECK(Topology(1, {}).connected());

  SplitMix64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 20;
    std::vector<std::pair<int, int>> edges;
    oracle::UnionFind uf(n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.uniform01() < 0.07) {
          edges.push_back({i, j});
          uf.unite(i, j);
        }
    const Topology t(n, edges);
    CHECK(t.connected() == uf.all_connected());
  }
}

TEST_CASE("topology rejects malformed edge sets") {
  CHECK_THROWS_AS(Topology(3, {{0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Topology(3, {{0, 1}, {1, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Topology(3, {{0, 5}}), std::invalid_argument);
  CHECK_THROWS_AS(Topology(0, {}), std::invalid_argument);
}

TEST_CASE("coordination residuals: consensus point and two-robot anchor") {
  const Topology t = Topology::ring(4);
  OffsetTable off{{0.0, 1.0, 2.0, 3.0}, {0.0, 0.5, 1.0, 1.5}};

  SUBCASE("zero at any shifted reference configuration") {
    std::vector<double> w1, w2;
    for (int i = 0; i < 4; ++i) {
      w1.push_back(off.w1_ref[static_cast<std::size_t>(i)] + 7.25);
      w2.push_back(off.w2_ref[static_cast<std::size_t>(i)] - 3.5);
    }
    for (int i = 0; i < 4; ++i) {
      auto [c1, c2] = coordination_residuals(t, off, w1, w2, i);
      CHECK(c1 == 0.0);
      CHECK(c2 == 0.0);
    }
  }
  SUBCASE("two robots, one edge, unit disagreement") {
    const Topology pair(2, {{0, 1}});
    OffsetTable zero{{0.0, 0.0}, {0.0, 0.0}};
    std::vector<double> w1{0.0, 1.0}, w2{0.0, 0.0};
    auto [c1a, c2a] = coordination_residuals(pair, zero, w1, w2, 0);
    auto [c1b, c2b] = coordination_residuals(pair, zero, w1, w2, 1);
    CHECK(c1a == 1.0);
    CHECK(c1b == -1.0);
    CHECK(c2a == 0.0);
    CHECK(c2b == 0.0);
  }
}

TEST_CASE("stacked residuals equal -L (w - w*) on random connected graphs") {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform(0.0, 9.99));
    // random spanning tree plus extra edges ensures connectivity
    std::vector<std::pair<int, int>> edges;
    std::set<std::pair<int, int>> seen;
    for (int i = 1; i < n; ++i) {
      const int j = static_cast<int>(rng.uniform(0.0, i - 1e-12));
      edges.push_back({j, i});
      seen.insert({j, i});
    }
    for (int extra = 0; extra < n; ++extra) {
      const int a = static_cast<int>(rng.uniform(0.0, n - 1e-12));
      const int b = static_cast<int>(rng.uniform(0.0, n - 1e-12));
      if (a == b) continue;
      auto key = std::minmax(a, b);
      if (seen.insert(key).second) edges.push_back(key);
    }
    const Topology t(n, edges);
    REQUIRE(t.connected());

    OffsetTable off;
    std::vector<double> w1, w2;
    for (int i = 0; i < n; ++i) {
      off.w1_ref.push_back(rng.uniform(-5, 5));
      off.w2_ref.push_back(rng.uniform(-5, 5));
      w1.push_back(rng.uniform(-10, 10));
      w2.push_back(rng.uniform(-10, 10));
    }
    const auto L = t.laplacian();
    double sum1 = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      double expect1 = 0.0, expect2 = 0.0;
      for (int j = 0; j < n; ++j) {
        expect1 -= L[i][j] * (w1[static_cast<std::size_t>(j)] - off.w1_ref[static_cast<std::size_t>(j)]);
        expect2 -= L[i][j] * (w2[static_cast<std::size_t>(j)] - off.w2_ref[static_cast<std::size_t>(j)]);
      }
      auto [c1, c2] = coordination_residuals(t, off, w1, w2, i);
      CHECK(c1 == doctest::Approx(expect1).epsilon(1e-12));
      CHECK(c2 == doctest::Approx(expect2).epsilon(1e-12));
      sum1 += c1;
      sum2 += c2;
    }
    CHECK(std::abs(sum1) < 1e-10);  // residuals always sum to zero
    CHECK(std::abs(sum2) < 1e-10);
  }
}

namespace {

// Index-recording vector: verifies the distributed-information contract.
struct RecordingVec {
  const std::vector<double>* data;
  mutable std::set<int>* touched;
  double operator[](std::size_t i) const {
    touched->insert(static_cast<int>(i));
    return (*data)[i];
  }
};

}  // namespace

TEST_CASE("residual computation touches only robot i and its neighbors") {
  const Topology t = Topology::ring(8);
  OffsetTable off{std::vector<double>(8, 0.0), std::vector<double>(8, 0.0)};
  std::vector<double> w1(8), w2(8);
  for (int i = 0; i < 8; ++i) {
    w1[static_cast<std::size_t>(i)] = i;
    w2[static_cast<std::size_t>(i)] = -i;
  }
  for (int i = 0; i < 8; ++i) {
    std::set<int> touched1, touched2;
    RecordingVec r1{&w1, &touched1}, r2{&w2, &touched2};
    coordination_residuals(t, off, r1, r2, i);
    std::set<int> allowed{i};
    for (int j : t.neighbors(i)) allowed.insert(j);
    CHECK(touched1 == allowed);
    CHECK(touched2 == allowed);
  }
}

TEST_CASE("derived offsets are antisymmetric and cycle-consistent") {
  SplitMix64 rng(5);
  OffsetTable off;
  for (int i = 0; i < 6; ++i) {
    off.w1_ref.push_back(rng.uniform(-4, 4));
    off.w2_ref.push_back(rng.uniform(-4, 4));
  }
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      CHECK(off.delta1(i, j) == -off.delta1(j, i));
      CHECK(off.delta2(i, j) == -off.delta2(j, i));
    }
  // sum around any cycle telescopes to zero
  double cyc = off.delta1(0, 3) + off.delta1(3, 5) + off.delta1(5, 1) + off.delta1(1, 0);
  CHECK(std::abs(cyc) < 1e-12);
}
