#pragma once

// Density-operator layer: validation, von Neumann entropy, partial trace
// and the support-restricted inverse square root used by the SRM decoder.

#include <numeric>
#include <set>
#include <string>

#include "cqbc/linalg.hpp"

namespace cqbc {

// Shared numeric conventions. Everything logarithmic is base 2 and the
// spectral support is defined by a single cutoff.
inline constexpr double kSupportCutoff = 1e-12;
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kEigFloor = -1e-10;

inline double log2_safe(double x) { return std::log2(x); }

inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

// h_b((1+x)/2), the entropy of a qubit mixture with Bloch overlap x
inline double binary_entropy_tilde(double x) {
  return binary_entropy((1.0 + x) / 2.0);
}

// p(1-q) + (1-p)q, crossover of cascaded binary symmetric channels
inline double binary_convolution(double p, double q) {
  return p * (1.0 - q) + (1.0 - p) * q;
}

struct ProductSpace {
  std::vector<std::size_t> dims;

  std::size_t total() const {
    std::size_t t = 1;
    for (std::size_t d : dims) {
      if (d < 1) throw std::invalid_argument("factor dimension must be >= 1");
      t *= d;
    }
    return t;
  }
};

struct DensityOperator {
  std::size_t dim = 0;
  CMatrix matrix;
};

inline DensityOperator validate(const CMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("density operator must be square");
  if (m.rows() == 0) throw std::invalid_argument("density operator must be nonempty");
  const double hdef = m.hermiticity_defect();
  if (hdef > kHermitianTol)
    throw std::invalid_argument("matrix is not Hermitian (defect " +
                                std::to_string(hdef) + ")");
  const cplx tr = m.trace();
  if (std::abs(tr - cplx(1.0, 0.0)) > kTraceTol)
    throw std::invalid_argument("trace is " + std::to_string(tr.real()) +
                                ", expected 1");
  const auto dec = jacobi_eigh(m);
  if (dec.values.front() < kEigFloor)
    throw std::invalid_argument("negative eigenvalue " +
                                std::to_string(dec.values.front()));
  return DensityOperator{m.rows(), m};
}

inline double entropy_of_spectrum(const std::vector<double>& values) {
  double h = 0.0;
  for (double v : values)
    if (v > kSupportCutoff) h -= v * std::log2(v);
  return h;
}

inline double von_neumann_entropy(const DensityOperator& rho) {
  return entropy_of_spectrum(jacobi_eigh(rho.matrix).values);
}

inline double von_neumann_entropy(const CMatrix& m) {
  return entropy_of_spectrum(jacobi_eigh(m).values);
}

// Reduced matrix on the kept factors; accepts any Hermitian block (not
// only unit-trace ones) so ensemble averages can be traced before
// normalization.
inline CMatrix partial_trace(const CMatrix& m, const ProductSpace& space,
                             const std::set<std::size_t>& keep) {
  if (space.total() != m.rows() || m.rows() != m.cols())
    throw std::invalid_argument("product space does not match operator dimension");
  if (keep.empty()) throw std::invalid_argument("keep set must be nonempty");
  for (std::size_t f : keep)
    if (f >= space.dims.size()) throw std::invalid_argument("keep index out of range");

  const std::size_t nf = space.dims.size();
  std::vector<std::size_t> keep_idx(keep.begin(), keep.end());
  std::vector<std::size_t> trace_idx;
  for (std::size_t f = 0; f < nf; ++f)
    if (!keep.count(f)) trace_idx.push_back(f);

  std::size_t dim_keep = 1, dim_trace = 1;
  for (std::size_t f : keep_idx) dim_keep *= space.dims[f];
  for (std::size_t f : trace_idx) dim_trace *= space.dims[f];

  // strides of each factor in the full row index
  std::vector<std::size_t> stride(nf, 1);
  for (std::size_t f = nf; f-- > 1;) stride[f - 1] = stride[f] * space.dims[f];

  auto full_index = [&](std::size_t kept, std::size_t traced) {
    std::size_t idx = 0;
    for (std::size_t f = keep_idx.size(); f-- > 0;) {
      const std::size_t d = space.dims[keep_idx[f]];
      idx += (kept % d) * stride[keep_idx[f]];
      kept /= d;
    }
    for (std::size_t f = trace_idx.size(); f-- > 0;) {
      const std::size_t d = space.dims[trace_idx[f]];
      idx += (traced % d) * stride[trace_idx[f]];
      traced /= d;
    }
    return idx;
  };

  CMatrix r(dim_keep, dim_keep);
  for (std::size_t a = 0; a < dim_keep; ++a)
    for (std::size_t b = 0; b < dim_keep; ++b) {
      cplx sum = 0.0;
      for (std::size_t e = 0; e < dim_trace; ++e)
        sum += m(full_index(a, e), full_index(b, e));
      r(a, b) = sum;
    }
  return r;
}

inline DensityOperator partial_trace(const DensityOperator& rho,
                                     const ProductSpace& space,
                                     const std::set<std::size_t>& keep) {
  return validate(partial_trace(rho.matrix, space, keep));
}

// f(eigenvalue) applied on the support, zero on the kernel
inline CMatrix spectral_apply(const CMatrix& m, double (*f)(double)) {
  const auto dec = jacobi_eigh(m);
  const std::size_t n = m.rows();
  CMatrix r(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    if (dec.values[k] <= kSupportCutoff) continue;
    const double fv = f(dec.values[k]);
    for (std::size_t i = 0; i < n; ++i) {
      const cplx vik = dec.vectors(i, k);
      if (vik == cplx(0.0, 0.0)) continue;
      for (std::size_t j = 0; j < n; ++j)
        r(i, j) += fv * vik * std::conj(dec.vectors(j, k));
    }
  }
  return r;
}

inline CMatrix psd_inv_sqrt(const CMatrix& m) {
  if (m.hermiticity_defect() > kHermitianTol)
    throw std::invalid_argument("psd_inv_sqrt needs a Hermitian matrix");
  return spectral_apply(m, +[](double x) { return 1.0 / std::sqrt(x); });
}

inline CMatrix support_projector(const CMatrix& m) {
  return spectral_apply(m, +[](double) { return 1.0; });
}

}  // namespace cqbc
