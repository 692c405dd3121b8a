// Test-only oracles, deliberately independent of the library's linear
// algebra paths: explicit index loops, series expansions and hand-rolled
// generators.
#pragma once

#include "nvtel/quantum.hpp"

#include <complex>
#include <random>
#include <vector>

namespace oracles {

using nvtel::Complex;
using nvtel::Matrix;

// elementwise Kronecker product
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

// exp(M) by scaling and squaring with a plain Taylor series
inline Matrix expm(const Matrix& m) {
  const double norm = m.cwiseAbs().maxCoeff() * m.rows();
  int squarings = 0;
  double scale = 1.0;
  while (norm * scale > 0.5) {
    scale *= 0.5;
    ++squarings;
  }
  Matrix x = m * scale;
  Matrix term = Matrix::Identity(m.rows(), m.cols());
  Matrix sum = term;
  for (int k = 1; k <= 24; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

// partial trace by explicit index contraction; keep_mask bit q set keeps
// qubit q (qubit 0 = most significant)
inline Matrix ptrace_contract(const Matrix& rho, int num_qubits, int keep_mask) {
  std::vector<int> keep, traced;
  for (int q = 0; q < num_qubits; ++q)
    (keep_mask & (1 << q) ? keep : traced).push_back(q);
  const int kn = static_cast<int>(keep.size());
  const int tn = static_cast<int>(traced.size());
  auto bit = [num_qubits](int idx, int q) {
    return (idx >> (num_qubits - 1 - q)) & 1;
  };
  Matrix out = Matrix::Zero(1 << kn, 1 << kn);
  for (int r = 0; r < rho.rows(); ++r) {
    for (int c = 0; c < rho.cols(); ++c) {
      bool diagonal_in_traced = true;
      for (int q : traced)
        if (bit(r, q) != bit(c, q)) {
          diagonal_in_traced = false;
          break;
        }
      if (!diagonal_in_traced) continue;
      int rr = 0, cc = 0;
      for (int q : keep) {
        rr = (rr << 1) | bit(r, q);
        cc = (cc << 1) | bit(c, q);
      }
      out(rr, cc) += rho(r, c);
    }
  }
  return out;
}

// random pure state amplitudes (Haar-ish via normalized Gaussians)
inline Eigen::VectorXcd random_ket(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXcd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = Complex(gauss(rng), gauss(rng));
  v /= v.norm();
  return v;
}

// random full-rank density matrix (Ginibre construction)
inline Matrix random_density(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  Matrix rho = g * g.adjoint();
  rho /= rho.trace();
  return rho;
}

// random unitary via Gram-Schmidt on a random complex matrix
inline Matrix random_unitary(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  for (int j = 0; j < dim; ++j) {
    for (int k = 0; k < j; ++k) g.col(j) -= g.col(k).dot(g.col(j)) * g.col(k);
    g.col(j) /= g.col(j).norm();
  }
  return g;
}

// two-sided Kolmogorov-Smirnov distance of samples against a discrete CDF
template <typename Cdf>
double ks_distance(std::vector<double> samples, Cdf cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double f = cdf(samples[i]);
    d = std::max(d, std::abs((i + 1) / n - f));
    d = std::max(d, std::abs(f - i / n));
  }
  return d;
}

}  // namespace oracles
