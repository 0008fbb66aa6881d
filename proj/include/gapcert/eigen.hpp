#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"
#include "rng.hpp"

namespace gapcert {

// Dense row-major square matrix.
struct SquareMatrix {
  int n = 0;
  std::vector<double> a;

  explicit SquareMatrix(int size = 0) : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}
  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

inline SquareMatrix adjacency_matrix(const RegularGraph& g) {
  SquareMatrix m(g.n());
  for (const Edge& e : g.edges()) {
    m(e.u, e.v) += 1.0;
    m(e.v, e.u) += 1.0;
  }
  return m;
}

namespace detail {

// Householder reduction to tridiagonal form (Numerical Recipes tred2 layout).
// On return diag/off hold the tridiagonal matrix; with vecs, z holds the
// orthogonal transform.
inline void tred2(SquareMatrix& z, std::vector<double>& diag, std::vector<double>& off, bool vecs) {
  const int n = z.n;
  diag.assign(n, 0.0);
  off.assign(n, 0.0);
  for (int i = n - 1; i > 0; --i) {
    int l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (int k = 0; k < i; ++k) scale += std::fabs(z(i, k));
      if (scale == 0.0) {
        off[i] = z(i, l);
      } else {
        for (int k = 0; k < i; ++k) {
          z(i, k) /= scale;
          h += z(i, k) * z(i, k);
        }
        double f = z(i, l);
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        off[i] = scale * g;
        h -= f * g;
        z(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j < i; ++j) {
          if (vecs) z(j, i) = z(i, j) / h;
          g = 0.0;
          for (int k = 0; k < j + 1; ++k) g += z(j, k) * z(i, k);
          for (int k = j + 1; k < i; ++k) g += z(k, j) * z(i, k);
          off[j] = g / h;
          f += off[j] * z(i, j);
        }
        double hh = f / (h + h);
        for (int j = 0; j < i; ++j) {
          f = z(i, j);
          off[j] = g = off[j] - hh * f;
          for (int k = 0; k < j + 1; ++k) z(j, k) -= (f * off[k] + g * z(i, k));
        }
      }
    } else {
      off[i] = z(i, l);
    }
    diag[i] = h;
  }
  if (vecs) diag[0] = 0.0;
  off[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    if (vecs) {
      if (diag[i] != 0.0) {
        for (int j = 0; j < i; ++j) {
          double g = 0.0;
          for (int k = 0; k < i; ++k) g += z(i, k) * z(k, j);
          for (int k = 0; k < i; ++k) z(k, j) -= g * z(k, i);
        }
      }
      diag[i] = z(i, i);
      z(i, i) = 1.0;
      for (int j = 0; j < i; ++j) z(j, i) = z(i, j) = 0.0;
    } else {
      diag[i] = z(i, i);
    }
  }
}

// Implicit-shift QL on a symmetric tridiagonal matrix. off[i] couples rows
// i-1 and i (tred2 convention). With vecs, rotations are accumulated into z's
// columns.
inline void tqli(std::vector<double>& diag, std::vector<double>& off, SquareMatrix* z) {
  const int n = static_cast<int>(diag.size());
  if (n == 0) return;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int i = 1; i < n; ++i) off[i - 1] = off[i];
  off[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        double dd = std::fabs(diag[m]) + std::fabs(diag[m + 1]);
        if (std::fabs(off[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw ResourceError("tqli: no convergence after 60 sweeps");
        double g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
        double r = std::hypot(g, 1.0);
        g = diag[m] - diag[l] + off[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * off[i];
          double b = c * off[i];
          off[i + 1] = (r = std::hypot(f, g));
          if (r == 0.0) {
            diag[i + 1] -= p;
            off[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = diag[i + 1] - p;
          r = (diag[i] - g) * s + 2.0 * c * b;
          diag[i + 1] = g + (p = s * r);
          g = c * r - b;
          if (z) {
            for (int k = 0; k < z->n; ++k) {
              f = (*z)(k, i + 1);
              (*z)(k, i + 1) = s * (*z)(k, i) + c * f;
              (*z)(k, i) = c * (*z)(k, i) - s * f;
            }
          }
        }
        if (r == 0.0 && i >= l) continue;
        diag[l] -= p;
        off[l] = g;
        off[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace detail

struct SymmetricEigen {
  std::vector<double> values;   // ascending
  SquareMatrix vectors;         // column i pairs with values[i]; empty unless requested
};

inline SymmetricEigen symmetric_eigen(SquareMatrix m, bool want_vectors) {
  SymmetricEigen out;
  std::vector<double> diag, off;
  detail::tred2(m, diag, off, want_vectors);
  detail::tqli(diag, off, want_vectors ? &m : nullptr);
  const int n = m.n;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return diag[a] < diag[b]; });
  out.values.resize(n);
  for (int i = 0; i < n; ++i) out.values[i] = diag[order[i]];
  if (want_vectors) {
    out.vectors = SquareMatrix(n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) out.vectors(k, i) = m(k, order[i]);
  }
  return out;
}

// Eigenvalues (ascending) and optionally eigenvectors of a symmetric
// tridiagonal matrix given by its diagonal and off-diagonal (size n-1).
inline SymmetricEigen tridiagonal_eigen(std::vector<double> diag, const std::vector<double>& sub, bool want_vectors) {
  const int n = static_cast<int>(diag.size());
  std::vector<double> off(n, 0.0);
  for (int i = 1; i < n; ++i) off[i] = sub[i - 1];
  SquareMatrix z(want_vectors ? n : 0);
  if (want_vectors)
    for (int i = 0; i < n; ++i) z(i, i) = 1.0;
  detail::tqli(diag, off, want_vectors ? &z : nullptr);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return diag[a] < diag[b]; });
  SymmetricEigen out;
  out.values.resize(n);
  for (int i = 0; i < n; ++i) out.values[i] = diag[order[i]];
  if (want_vectors) {
    out.vectors = SquareMatrix(n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) out.vectors(k, i) = z(k, order[i]);
  }
  return out;
}

// Extremal eigenpairs of the adjacency matrix restricted to the complement of
// the all-ones vector, by Lanczos with full reorthogonalization.
struct LanczosResult {
  double top = 0.0;      // largest eigenvalue on 1-perp, i.e. lambda_2
  double bottom = 0.0;   // smallest eigenvalue, lambda_n
  double top_residual = 0.0;
  double bottom_residual = 0.0;
  int iterations = 0;
};

inline LanczosResult lanczos_extremal(const RegularGraph& g, double tol = 1e-9, int max_iter = 0,
                                      std::uint64_t seed = 0x5eed) {
  const int n = g.n();
  if (n < 2) throw PreconditionError("lanczos_extremal: need n >= 2");
  const int dim = n - 1;  // dimension of the invariant subspace 1-perp
  if (max_iter <= 0) max_iter = std::min(dim, 600);
  max_iter = std::min(max_iter, dim);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));

  auto orth_ones = [&](std::vector<double>& x) {
    double s = std::accumulate(x.begin(), x.end(), 0.0) * inv_sqrt_n;
    for (double& xi : x) xi -= s * inv_sqrt_n;
  };
  auto norm = [](const std::vector<double>& x) {
    double s = 0.0;
    for (double xi : x) s += xi * xi;
    return std::sqrt(s);
  };

  Rng rng(seed);
  std::vector<std::vector<double>> q;
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  orth_ones(v);
  double nv = norm(v);
  for (double& x : v) x /= nv;
  q.push_back(v);

  std::vector<double> alpha, beta, w(n);
  LanczosResult res;
  double best_resid = std::numeric_limits<double>::infinity();
  for (int j = 0; j < max_iter; ++j) {
    const auto& qj = q[j];
    for (Vertex x = 0; x < n; ++x) {
      double s = 0.0;
      for (Vertex y : g.neighbors(x)) s += qj[y];
      w[x] = s;
    }
    double a = 0.0;
    for (int i = 0; i < n; ++i) a += w[i] * qj[i];
    alpha.push_back(a);
    // Two passes of classical Gram-Schmidt against the basis and the ones vector.
    for (int pass = 0; pass < 2; ++pass) {
      orth_ones(w);
      for (const auto& qi : q) {
        double c = 0.0;
        for (int i = 0; i < n; ++i) c += w[i] * qi[i];
        for (int i = 0; i < n; ++i) w[i] -= c * qi[i];
      }
    }
    double b = norm(w);
    const int m = j + 1;
    bool exhausted = (m == dim) || b < 1e-12;
    if (m % 10 == 0 || exhausted || m == max_iter) {
      auto te = tridiagonal_eigen(alpha, beta, true);
      double rt = std::fabs(b * te.vectors(m - 1, m - 1));
      double rb = std::fabs(b * te.vectors(m - 1, 0));
      if (exhausted) rt = rb = 0.0;
      res = {te.values[m - 1], te.values[0], rt, rb, m};
      best_resid = std::min(best_resid, std::max(rt, rb));
      if (std::max(rt, rb) <= tol) return res;
    }
    if (exhausted) return res;
    beta.push_back(b);
    for (double& x : w) x /= b;
    q.push_back(w);
  }
  throw ResourceError("lanczos_extremal: residual " + std::to_string(best_resid) + " above tol after " +
                      std::to_string(max_iter) + " iterations");
}

}  // namespace gapcert
