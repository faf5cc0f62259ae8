#pragma once

// Prime-field arithmetic, field linear algebra and coset / nested-coset
// code constructions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace cqbc {

using FieldVec = std::vector<int>;
using FieldMat = std::vector<FieldVec>;

class PrimeField {
 public:
  explicit PrimeField(int upsilon) : upsilon_(upsilon) {
    if (upsilon < 2) throw std::invalid_argument("field size must be >= 2");
    for (int d = 2; d * d <= upsilon; ++d)
      if (upsilon % d == 0)
        throw std::invalid_argument("field size " + std::to_string(upsilon) +
                                    " is not prime");
  }

  int size() const { return upsilon_; }

  int add(int a, int b) const { return (a + b) % upsilon_; }
  int sub(int a, int b) const { return ((a - b) % upsilon_ + upsilon_) % upsilon_; }
  int mul(int a, int b) const { return (a * b) % upsilon_; }
  int neg(int a) const { return (upsilon_ - a % upsilon_) % upsilon_; }

  int inv(int a) const {
    a %= upsilon_;
    if (a == 0) throw std::domain_error("inverse of zero");
    // Fermat: a^(p-2) mod p
    int result = 1, base = a, e = upsilon_ - 2;
    while (e > 0) {
      if (e & 1) result = mul(result, base);
      base = mul(base, base);
      e >>= 1;
    }
    return result;
  }

  void check_element(int a) const {
    if (a < 0 || a >= upsilon_)
      throw std::invalid_argument("entry " + std::to_string(a) +
                                  " out of field F_" + std::to_string(upsilon_));
  }

  bool operator==(const PrimeField& o) const { return upsilon_ == o.upsilon_; }
  bool operator!=(const PrimeField& o) const { return !(*this == o); }

 private:
  int upsilon_;
};

inline void check_vec(const PrimeField& f, const FieldVec& v) {
  for (int x : v) f.check_element(x);
}

inline void check_mat(const PrimeField& f, const FieldMat& m, std::size_t cols) {
  for (const auto& row : m) {
    if (row.size() != cols) throw std::invalid_argument("ragged generator matrix");
    check_vec(f, row);
  }
}

inline FieldVec vec_add(const PrimeField& f, const FieldVec& a, const FieldVec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("vector length mismatch");
  FieldVec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = f.add(a[i], b[i]);
  return r;
}

inline FieldVec vec_sub(const PrimeField& f, const FieldVec& a, const FieldVec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("vector length mismatch");
  FieldVec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = f.sub(a[i], b[i]);
  return r;
}

// row vector times matrix
inline FieldVec vec_mat(const PrimeField& f, const FieldVec& a, const FieldMat& g,
                        std::size_t n) {
  if (a.size() != g.size()) throw std::invalid_argument("dimension mismatch");
  FieldVec r(n, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (g[i].size() != n) throw std::invalid_argument("dimension mismatch");
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < n; ++j)
      r[j] = f.add(r[j], f.mul(a[i], g[i][j]));
  }
  return r;
}

// Row echelon form by Gaussian elimination, first-nonzero pivoting with
// lowest-row-index tie breaking. Returns the echelon rows (pivots
// normalized to 1) and the rank.
inline std::pair<FieldMat, int> row_echelon(const PrimeField& f, FieldMat m) {
  const std::size_t rows = m.size();
  const std::size_t cols = rows ? m[0].size() : 0;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t piv = rows;
    for (std::size_t i = r; i < rows; ++i)
      if (m[i][c] != 0) { piv = i; break; }
    if (piv == rows) continue;
    std::swap(m[r], m[piv]);
    const int scale = f.inv(m[r][c]);
    for (std::size_t j = c; j < cols; ++j) m[r][j] = f.mul(m[r][j], scale);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || m[i][c] == 0) continue;
      const int factor = m[i][c];
      for (std::size_t j = c; j < cols; ++j)
        m[i][j] = f.sub(m[i][j], f.mul(factor, m[r][j]));
    }
    ++r;
  }
  m.resize(r);
  return {m, static_cast<int>(r)};
}

inline int field_rank(const PrimeField& f, const FieldMat& m) {
  return row_echelon(f, m).second;
}

// Is v in the row space of the echelon basis?
inline bool in_row_space(const PrimeField& f, const FieldMat& echelon, FieldVec v) {
  for (const auto& row : echelon) {
    std::size_t lead = 0;
    while (lead < row.size() && row[lead] == 0) ++lead;
    if (lead == row.size()) continue;
    if (v[lead] != 0) {
      const int factor = v[lead];
      for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = f.sub(v[j], f.mul(factor, row[j]));
    }
  }
  return std::all_of(v.begin(), v.end(), [](int x) { return x == 0; });
}

struct CosetCode {
  int upsilon = 2;
  std::size_t n = 0;
  std::size_t k = 0;
  FieldMat g;   // k x n
  FieldVec b;   // length n

  PrimeField field() const { return PrimeField(upsilon); }

  void validate() const {
    PrimeField f(upsilon);
    if (g.size() != k || b.size() != n)
      throw std::invalid_argument("coset code dimension mismatch");
    check_mat(f, g, n);
    check_vec(f, b);
  }

  double rate_bits() const {
    return n == 0 ? 0.0
                  : (static_cast<double>(k) / static_cast<double>(n)) *
                        std::log2(static_cast<double>(upsilon));
  }
};

// u^n(a) = a g + b
inline FieldVec coset_codeword(const CosetCode& code, const FieldVec& a) {
  code.validate();
  PrimeField f(code.upsilon);
  if (a.size() != code.k) throw std::invalid_argument("message length mismatch");
  check_vec(f, a);
  return vec_add(f, vec_mat(f, a, code.g, code.n), code.b);
}

struct NestedCosetCode {
  int upsilon = 2;
  std::size_t n = 0;
  std::size_t k = 0;  // inner dimension
  std::size_t l = 0;  // outer dimension
  FieldMat g_inner;   // k x n
  FieldMat g_outer;   // l x n
  FieldVec b;         // length n

  PrimeField field() const { return PrimeField(upsilon); }

  void validate() const {
    PrimeField f(upsilon);
    if (g_inner.size() != k || g_outer.size() != l || b.size() != n)
      throw std::invalid_argument("nested coset code dimension mismatch");
    check_mat(f, g_inner, n);
    check_mat(f, g_outer, n);
    check_vec(f, b);
  }

  // stacked (inner over outer) generator
  FieldMat stacked() const {
    FieldMat m = g_inner;
    m.insert(m.end(), g_outer.begin(), g_outer.end());
    return m;
  }
};

// u^n(a, m) = a g_I + m g_{O/I} + b
inline FieldVec ncc_codeword(const NestedCosetCode& code, const FieldVec& a,
                             const FieldVec& m) {
  code.validate();
  PrimeField f(code.upsilon);
  if (a.size() != code.k || m.size() != code.l)
    throw std::invalid_argument("message length mismatch");
  check_vec(f, a);
  check_vec(f, m);
  FieldVec u = vec_mat(f, a, code.g_inner, code.n);
  u = vec_add(f, u, vec_mat(f, m, code.g_outer, code.n));
  return vec_add(f, u, code.b);
}

// Every codeword of `small` lies in the codeword set of `large` iff the
// rows of small's generators lie in large's row space and the bias
// difference does too.
inline bool is_subcoset(const NestedCosetCode& small, const NestedCosetCode& large) {
  small.validate();
  large.validate();
  if (small.upsilon != large.upsilon)
    throw std::invalid_argument("field mismatch between codes");
  if (small.n != large.n)
    throw std::invalid_argument("block length mismatch between codes");
  PrimeField f(small.upsilon);
  const FieldMat basis = row_echelon(f, large.stacked()).first;
  for (const auto& row : small.g_inner)
    if (!in_row_space(f, basis, row)) return false;
  for (const auto& row : small.g_outer)
    if (!in_row_space(f, basis, row)) return false;
  return in_row_space(f, basis, vec_sub(f, small.b, large.b));
}

// Prefix convention: the smaller code's generator rows are the leading
// rows of the larger code's generators.
inline bool generator_prefix_of(const NestedCosetCode& small,
                                const NestedCosetCode& large) {
  if (small.k > large.k || small.l > large.l) return false;
  for (std::size_t i = 0; i < small.k; ++i)
    if (small.g_inner[i] != large.g_inner[i]) return false;
  for (std::size_t i = 0; i < small.l; ++i)
    if (small.g_outer[i] != large.g_outer[i]) return false;
  return true;
}

struct SumCoset {
  NestedCosetCode code;   // the sum NCC: s = max(s2,s3), t = max(t2,t3), bias b2+b3
  FieldVec message;       // m_plus = m2 + m3 after zero padding
};

// Sum of two sub-coset-related NCCs. The shorter outer message is zero
// padded; u2(a2,m2) + u3(a3,m3) is a codeword of the returned code under
// message m_plus for every a2, a3.
inline SumCoset sum_coset(const NestedCosetCode& c2, const NestedCosetCode& c3,
                          const FieldVec& m2, const FieldVec& m3) {
  c2.validate();
  c3.validate();
  if (c2.upsilon != c3.upsilon) throw std::invalid_argument("field mismatch");
  if (c2.n != c3.n) throw std::invalid_argument("block length mismatch");
  if (m2.size() != c2.l || m3.size() != c3.l)
    throw std::invalid_argument("message length mismatch");
  PrimeField f(c2.upsilon);
  check_vec(f, m2);
  check_vec(f, m3);

  const NestedCosetCode* large = nullptr;
  if (generator_prefix_of(c3, c2))
    large = &c2;
  else if (generator_prefix_of(c2, c3))
    large = &c3;
  else
    throw std::invalid_argument("neither code is a sub-coset of the other");

  SumCoset sum;
  sum.code = *large;
  sum.code.b = vec_add(f, c2.b, c3.b);
  FieldVec p2 = m2, p3 = m3;
  p2.resize(large->l, 0);
  p3.resize(large->l, 0);
  sum.message = vec_add(f, p2, p3);
  return sum;
}

// Membership of u in the coset of `code` indexed by outer message m:
// u - m g_O - b must lie in the row space of g_I.
inline bool in_coset(const NestedCosetCode& code, const FieldVec& m,
                     const FieldVec& u) {
  PrimeField f(code.upsilon);
  FieldVec r = vec_sub(f, u, vec_mat(f, m, code.g_outer, code.n));
  r = vec_sub(f, r, code.b);
  const FieldMat basis = row_echelon(f, code.g_inner).first;
  return in_row_space(f, basis, r);
}

// ---- JSON serialization -------------------------------------------------

inline nlohmann::json to_json(const NestedCosetCode& c) {
  return {{"upsilon", c.upsilon}, {"n", c.n},       {"gI", c.g_inner},
          {"gOI", c.g_outer},     {"b", c.b}};
}

inline NestedCosetCode ncc_from_json(const nlohmann::json& j) {
  NestedCosetCode c;
  c.upsilon = j.at("upsilon").get<int>();
  c.n = j.at("n").get<std::size_t>();
  c.g_inner = j.at("gI").get<FieldMat>();
  c.g_outer = j.at("gOI").get<FieldMat>();
  c.b = j.at("b").get<FieldVec>();
  c.k = c.g_inner.size();
  c.l = c.g_outer.size();
  c.validate();
  return c;
}

}  // namespace cqbc
