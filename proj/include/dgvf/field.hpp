#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "dgvf/paths.hpp"
#include "dgvf/vec.hpp"

namespace dgvf {

// Generalized coordinate xi = (x_1..x_n, w1, w2) in R^{n+2}. The two virtual
// coordinates parameterize the interception and enclosing curves.
struct GeneralizedState {
  Vec x;
  double w1 = 0.0;
  double w2 = 0.0;

  int dim() const { return static_cast<int>(x.size()); }
};

struct FieldGains {
  Vec k;              // manifold-attraction gains, one per spatial component
  double kc1 = 1.0;   // coordination weight on the w1 row
  double kc2 = 1.0;   // coordination weight on the w2 row

  void validate() const {
    if (k.empty()) throw std::invalid_argument("gains: k must not be empty");
    for (double kj : k)
      if (!(kj > 0.0)) throw std::invalid_argument("gains: k entries must be positive");
    if (!(kc1 > 0.0) || !(kc2 > 0.0)) throw std::invalid_argument("gains: kc1, kc2 must be positive");
  }
};

// Desired parametric speeds and the sign-fixed lambda entries that realize
// them. lambda_w1 = (-1)^{n+2} w1dot*, lambda_w2 = (-1)^{n+1} w2dot*; with
// these signs the field's (w1, w2) rows equal (w1dot*, w2dot*) on the
// manifold. Interior lambda components are fixed at zero.
struct PropagationSpeeds {
  double w1dot_star = 0.0;
  double w2dot_star = 0.0;

  static double parity(int n) { return (n % 2 == 0) ? 1.0 : -1.0; }  // (-1)^n
  double lambda_w1(int n) const { return parity(n) * w1dot_star; }
  double lambda_w2(int n) const { return -parity(n) * w2dot_star; }
};

namespace detail {

// Determinant as the sum of signed Leibniz monomials. Each monomial is
// multiplied in ascending column order and the terms are accumulated in a
// magnitude-sorted order, so permuting the rows reproduces the identical
// monomial values with flipped signs: a row swap negates the result
// bit-exactly, and duplicate rows cancel to an exact zero. Factorial cost;
// meant for the small matrices of the wedge (the composite manifold needs
// 4x4).
inline double det_leibniz(const std::vector<Vec>& rows, const std::vector<int>& cols) {
  const std::size_t m = cols.size();
  if (m > 9) throw std::invalid_argument("wedge: dimension too large for the monomial determinant");
  std::vector<int> perm(m);
  for (std::size_t i = 0; i < m; ++i) perm[i] = static_cast<int>(i);
  std::vector<double> terms;
  std::size_t count = 1;
  for (std::size_t i = 2; i <= m; ++i) count *= i;
  terms.reserve(count);
  do {
    int inversions = 0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        if (perm[i] > perm[j]) ++inversions;
    double prod = (inversions % 2 == 0) ? 1.0 : -1.0;
    for (std::size_t c = 0; c < m; ++c)
      prod *= rows[static_cast<std::size_t>(perm[c])][static_cast<std::size_t>(cols[c])];
    terms.push_back(prod);
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::sort(terms.begin(), terms.end(), [](double a, double b) {
    std::uint64_t ba, bb;
    std::memcpy(&ba, &a, sizeof a);
    std::memcpy(&bb, &b, sizeof b);
    const std::uint64_t abs_a = ba & 0x7fffffffffffffffULL;
    const std::uint64_t abs_b = bb & 0x7fffffffffffffffULL;
    if (abs_a != abs_b) return abs_a < abs_b;
    return (ba >> 63) > (bb >> 63);  // negative before positive on ties
  });
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum;
}

}  // namespace detail

// Generalized cross product of m vectors in R^{m+1}: component k is the
// cofactor (-1)^k det(M_k), where M_k stacks the inputs as rows and deletes
// column k. The output is orthogonal to every input and the orientation
// matches the ordinary cross product for m = 2.
inline Vec wedge(const std::vector<Vec>& vectors) {
  if (vectors.empty()) throw std::invalid_argument("wedge: no input vectors");
  const std::size_t m = vectors.size();
  const std::size_t d = m + 1;
  for (const Vec& v : vectors)
    if (v.size() != d) throw std::invalid_argument("wedge: need m vectors of dimension m+1");
  Vec out(d);
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<int> cols;
    cols.reserve(m);
    for (std::size_t c = 0; c < d; ++c)
      if (c != k) cols.push_back(static_cast<int>(c));
    const double minor = detail::det_leibniz(vectors, cols);
    out[k] = (k % 2 == 0) ? minor : -minor;
  }
  return out;
}

// Gradient of phi_j with respect to the generalized coordinate: e_j in the
// spatial block, -f'_j(w1) in the w1 slot, -g'_j(w2) in the w2 slot. In
// real-time-target mode f' is the estimated target velocity.
inline Vec grad_phi(const CompositeManifold& m, const GeneralizedState& xi, int j, double t = 0.0) {
  const int n = m.dim();
  if (j < 0 || j >= n) throw std::invalid_argument("grad_phi: component index out of range");
  if (xi.dim() != n) throw std::invalid_argument("grad_phi: state dimension mismatch");
  Vec out(static_cast<std::size_t>(n) + 2, 0.0);
  out[static_cast<std::size_t>(j)] = 1.0;
  out[static_cast<std::size_t>(n)] = -m.f_tangent(xi.w1, t)[static_cast<std::size_t>(j)];
  out[static_cast<std::size_t>(n) + 1] = -m.g_tangent(xi.w2)[static_cast<std::size_t>(j)];
  return out;
}

// Closed-form manifold-navigation field:
//   spatial row j : (-1)^n (lambda_w1 f'_j - lambda_w2 g'_j) - k_j phi_j
//   w1 row        : (-1)^n lambda_w1 + sum_j k_j phi_j f'_j
//   w2 row        : -(-1)^n lambda_w2 + sum_j k_j phi_j g'_j
// Never vanishes when (w1dot*, w2dot*) != (0, 0): the propagation part is
// orthogonal to every grad phi_j while the correction part lies in their span.
inline Vec navigation_field(const CompositeManifold& m, const GeneralizedState& xi,
                            const FieldGains& gains, const PropagationSpeeds& speeds,
                            double t = 0.0) {
  const int n = m.dim();
  if (xi.dim() != n) throw std::invalid_argument("navigation_field: state dimension mismatch");
  if (static_cast<int>(gains.k.size()) != n)
    throw std::invalid_argument("navigation_field: gain dimension mismatch");
  const Vec phi = m.phi(xi.x, xi.w1, xi.w2, t);
  const Vec fd = m.f_tangent(xi.w1, t);
  const Vec gd = m.g_tangent(xi.w2);
  const double sgn = PropagationSpeeds::parity(n);
  const double lw1 = speeds.lambda_w1(n);
  const double lw2 = speeds.lambda_w2(n);

  Vec out(static_cast<std::size_t>(n) + 2);
  double sum_f = 0.0, sum_g = 0.0;
  for (int j = 0; j < n; ++j) {
    const std::size_t js = static_cast<std::size_t>(j);
    out[js] = sgn * (lw1 * fd[js] - lw2 * gd[js]) - gains.k[js] * phi[js];
    sum_f += gains.k[js] * phi[js] * fd[js];
    sum_g += gains.k[js] * phi[js] * gd[js];
  }
  out[static_cast<std::size_t>(n)] = sgn * lw1 + sum_f;
  out[static_cast<std::size_t>(n) + 1] = -sgn * lw2 + sum_g;
  return out;
}

// Wedge-product construction of the same field:
//   chi = wedge(grad phi_1, ..., grad phi_n, lambda) - sum_j k_j phi_j grad phi_j
// with lambda = (0, ..., 0, lambda_w2, lambda_w1). Kept as an independent
// evaluation route; the closed form above must agree with it.
inline Vec navigation_field_wedge(const CompositeManifold& m, const GeneralizedState& xi,
                                  const FieldGains& gains, const PropagationSpeeds& speeds,
                                  double t = 0.0) {
  const int n = m.dim();
  if (xi.dim() != n) throw std::invalid_argument("navigation_field_wedge: state dimension mismatch");
  if (static_cast<int>(gains.k.size()) != n)
    throw std::invalid_argument("navigation_field_wedge: gain dimension mismatch");
  const Vec phi = m.phi(xi.x, xi.w1, xi.w2, t);
  const Vec fd = m.f_tangent(xi.w1, t);
  const Vec gd = m.g_tangent(xi.w2);
  const std::size_t dim = static_cast<std::size_t>(n) + 2;

  std::vector<Vec> inputs;
  inputs.reserve(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j < n; ++j) {
    Vec g(dim, 0.0);
    g[static_cast<std::size_t>(j)] = 1.0;
    g[static_cast<std::size_t>(n)] = -fd[static_cast<std::size_t>(j)];
    g[dim - 1] = -gd[static_cast<std::size_t>(j)];
    inputs.push_back(std::move(g));
  }
  Vec lambda(dim, 0.0);
  lambda[static_cast<std::size_t>(n)] = speeds.lambda_w2(n);
  lambda[dim - 1] = speeds.lambda_w1(n);
  inputs.push_back(std::move(lambda));

  Vec out = wedge(inputs);
  for (int j = 0; j < n; ++j) {
    const std::size_t js = static_cast<std::size_t>(j);
    const double c = gains.k[js] * phi[js];
    out[js] -= c * inputs[js][js];  // inputs[j] is grad phi_j
    out[static_cast<std::size_t>(n)] -= c * inputs[js][static_cast<std::size_t>(n)];
    out[dim - 1] -= c * inputs[js][dim - 1];
  }
  return out;
}

// Full distributed field: navigation field plus the consensus residuals,
// which enter only the two virtual-coordinate rows.
inline Vec composite_field(const CompositeManifold& m, const GeneralizedState& xi,
                           const FieldGains& gains, const PropagationSpeeds& speeds,
                           double c1, double c2, double t = 0.0) {
  Vec out = navigation_field(m, xi, gains, speeds, t);
  const std::size_t n = static_cast<std::size_t>(m.dim());
  out[n] += gains.kc1 * c1;
  out[n + 1] += gains.kc2 * c2;
  return out;
}

}  // namespace dgvf
