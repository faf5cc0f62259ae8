#pragma once

// Dense complex matrices and a cyclic-Jacobi Hermitian eigensolver.
// Dimensions stay small (<= ~512) in every workflow, so everything is
// straightforward O(n^3) dense code.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include <json.hpp>

namespace cqbc {

using cplx = std::complex<double>;

class CMatrix {
 public:
  CMatrix() : rows_(0), cols_(0) {}
  CMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols, cplx(0.0, 0.0)) {}

  static CMatrix identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const {
    return a_[i * cols_ + j];
  }

  CMatrix operator+(const CMatrix& o) const {
    check_same_shape(o);
    CMatrix r(rows_, cols_);
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] + o.a_[i];
    return r;
  }

  CMatrix operator-(const CMatrix& o) const {
    check_same_shape(o);
    CMatrix r(rows_, cols_);
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] - o.a_[i];
    return r;
  }

  CMatrix operator*(const CMatrix& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("matrix product shape mismatch");
    CMatrix r(rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < cols_; ++k) {
        const cplx aik = (*this)(i, k);
        if (aik == cplx(0.0, 0.0)) continue;
        for (std::size_t j = 0; j < o.cols_; ++j) r(i, j) += aik * o(k, j);
      }
    return r;
  }

  CMatrix operator*(cplx s) const {
    CMatrix r(rows_, cols_);
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] * s;
    return r;
  }

  CMatrix& operator+=(const CMatrix& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
  }

  CMatrix adjoint() const {
    CMatrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
  }

  cplx trace() const {
    if (rows_ != cols_) throw std::invalid_argument("trace of non-square matrix");
    cplx t = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (const cplx& z : a_) m = std::max(m, std::abs(z));
    return m;
  }

  double frobenius() const {
    double s = 0.0;
    for (const cplx& z : a_) s += std::norm(z);
    return std::sqrt(s);
  }

  // largest entrywise deviation from the adjoint
  double hermiticity_defect() const {
    double m = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return m;
  }

 private:
  void check_same_shape(const CMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw std::invalid_argument("matrix shape mismatch");
  }

  std::size_t rows_, cols_;
  std::vector<cplx> a_;
};

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      if (aij == cplx(0.0, 0.0)) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return r;
}

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  CMatrix vectors;             // columns are the eigenvectors, same order
};

// Cyclic Jacobi for Hermitian matrices. Off-diagonal Frobenius norm is
// driven below 1e-13 (relative to the matrix scale); at most 100 sweeps.
inline EigenDecomposition jacobi_eigh(CMatrix a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("eigensolver needs a square matrix");
  if (a.hermiticity_defect() > 1e-8)
    throw std::invalid_argument("eigensolver needs a Hermitian matrix");
  const std::size_t n = a.rows();
  CMatrix v = CMatrix::identity(n);
  const double scale = std::max(1.0, a.frobenius());
  const double threshold = 1e-13 * scale;

  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < 100 && off_norm() > threshold; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double r = std::abs(a(p, q));
        if (r <= 1e-300) continue;
        const cplx phase = a(p, q) / r;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (app - aqq) / (2.0 * r);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // unitary block: U_pp = c, U_pq = -s, U_qp = conj(phase) s, U_qq = conj(phase) c
        const cplx uqp = std::conj(phase) * s;
        const cplx uqq = std::conj(phase) * c;
        for (std::size_t i = 0; i < n; ++i) {  // A <- A U
          const cplx aip = a(i, p), aiq = a(i, q);
          a(i, p) = aip * c + aiq * uqp;
          a(i, q) = aip * (-s) + aiq * uqq;
        }
        for (std::size_t i = 0; i < n; ++i) {  // A <- U^dag A
          const cplx api = a(p, i), aqi = a(q, i);
          a(p, i) = api * c + aqi * std::conj(uqp);
          a(q, i) = api * (-s) + aqi * std::conj(uqq);
        }
        for (std::size_t i = 0; i < n; ++i) {  // V <- V U
          const cplx vip = v(i, p), viq = v(i, q);
          v(i, p) = vip * c + viq * uqp;
          v(i, q) = vip * (-s) + viq * uqq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a(x, x).real() < a(y, y).real();
  });

  EigenDecomposition dec;
  dec.values.resize(n);
  dec.vectors = CMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    dec.values[j] = a(order[j], order[j]).real();
    for (std::size_t i = 0; i < n; ++i) dec.vectors(i, j) = v(i, order[j]);
  }
  return dec;
}

// ---- JSON: [[ [re,im], ... ], ...] --------------------------------------

inline nlohmann::json matrix_to_json(const CMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.cols(); ++j)
      row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMatrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix JSON must be a nonempty array");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  CMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (j[i].size() != cols) throw std::invalid_argument("ragged matrix JSON");
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& cell = j[i][c];
      if (cell.is_number()) {
        m(i, c) = cplx(cell.get<double>(), 0.0);
      } else if (cell.is_array() && cell.size() == 2) {
        m(i, c) = cplx(cell[0].get<double>(), cell[1].get<double>());
      } else {
        throw std::invalid_argument(
            "matrix entries must be numbers or [re, im] pairs");
      }
    }
  }
  return m;
}

}  // namespace cqbc
