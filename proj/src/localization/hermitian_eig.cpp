#include "cfisac/localization/hermitian_eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cfisac::localization {

void jacobi_symmetric(RMat a, RVec& values, RMat& vectors, double tol) {
  const int n = static_cast<int>(a.rows());
  RMat v = RMat::Identity(n, n);
  const double scale = std::max(a.norm(), 1e-300);

  auto off_norm = [&] {
    double s = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) s += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < 100 && off_norm() > tol * scale; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) < a(y, y); });
  values.resize(n);
  vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    values[i] = a(order[i], order[i]);
    vectors.col(i) = v.col(order[i]);
  }
}

HermitianEig hermitian_eig(const CMat& m, double tol) {
  if (m.rows() != m.cols()) throw std::invalid_argument("hermitian_eig: matrix is not square");
  const int n = static_cast<int>(m.rows());
  const double herm_err = (m - m.adjoint()).norm();
  if (herm_err > 1e-9 * std::max(m.norm(), 1.0)) {
    throw std::invalid_argument("hermitian_eig: matrix is not Hermitian");
  }

  RMat emb(2 * n, 2 * n);
  emb << m.real(), -m.imag(), m.imag(), m.real();
  emb = 0.5 * (emb + emb.transpose());
  RVec rvals;
  RMat rvecs;
  jacobi_symmetric(emb, rvals, rvecs, tol);

  // Every eigenvalue of m appears twice in the embedding, as [x; y] and [-y; x] for v = x + jy.
  // Greedily keep the real vector whose complex image is least explained by those already kept.
  std::vector<CVec> kept;
  std::vector<bool> used(2 * n, false);
  for (int pick = 0; pick < n; ++pick) {
    int best = -1;
    double best_norm = -1.0;
    CVec best_res;
    for (int r = 0; r < 2 * n; ++r) {
      if (used[r]) continue;
      CVec c(n);
      for (int i = 0; i < n; ++i) c[i] = cd(rvecs(i, r), rvecs(n + i, r));
      for (const CVec& u : kept) c -= u * u.dot(c);
      const double nr = c.norm();
      if (nr > best_norm) {
        best_norm = nr;
        best = r;
        best_res = c;
      }
    }
    used[best] = true;
    best_res /= best_norm;
    kept.push_back(best_res);
  }

  std::vector<double> lam(n);
  for (int i = 0; i < n; ++i) lam[i] = std::real(kept[i].dot(m * kept[i]));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return lam[x] < lam[y]; });

  HermitianEig out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.values[i] = lam[order[i]];
    out.vectors.col(i) = kept[order[i]];
  }
  return out;
}

}  // namespace cfisac::localization
