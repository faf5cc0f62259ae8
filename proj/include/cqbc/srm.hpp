#pragma once

// Exact square-root-measurement lab at toy block lengths: labeled state
// ensembles, POVM construction/validation, decoding error probabilities,
// and the sum-coset group decoder that recovers only the sum of two
// receivers' codewords.

#include <functional>

#include "cqbc/cqstates.hpp"

namespace cqbc {

inline constexpr double kPovmEigTol = 1e-9;
inline constexpr double kPovmSumTol = 1e-8;
inline constexpr std::size_t kSrmDimCap = 1024;
inline const std::string kPovmRemainderLabel = "⊥";  // the ⊥ outcome

struct StateEnsemble {
  std::vector<std::string> labels;
  std::vector<double> priors;
  std::vector<CMatrix> states;
  std::size_t dim = 0;

  void validate_ensemble() const {
    if (labels.empty() || labels.size() != priors.size() ||
        labels.size() != states.size())
      throw std::invalid_argument("ensemble field sizes disagree");
    double sum = 0.0;
    for (double p : priors) {
      if (p < 0.0) throw std::invalid_argument("negative prior");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kPmfTol)
      throw std::invalid_argument("priors sum to " + std::to_string(sum));
    for (const auto& s : states) {
      if (s.rows() != dim || s.cols() != dim)
        throw std::invalid_argument("ensemble state dimension mismatch");
      validate(s);
    }
  }
};

struct Povm {
  std::vector<std::string> labels;
  std::vector<CMatrix> elements;
  std::size_t dim = 0;

  void validate_povm() const {
    if (labels.size() != elements.size() || elements.empty())
      throw std::invalid_argument("POVM field sizes disagree");
    CMatrix sum(dim, dim);
    for (const auto& el : elements) {
      if (el.rows() != dim || el.cols() != dim)
        throw std::invalid_argument("POVM element dimension mismatch");
      if (el.hermiticity_defect() > kHermitianTol)
        throw std::invalid_argument("POVM element not Hermitian");
      const auto dec = jacobi_eigh(el);
      if (dec.values.front() < -kPovmEigTol)
        throw std::invalid_argument("POVM element has eigenvalue " +
                                    std::to_string(dec.values.front()));
      sum += el;
    }
    const CMatrix resid = sum - CMatrix::identity(dim);
    if (resid.max_abs() > kPovmSumTol)
      throw std::invalid_argument("POVM elements sum to identity + " +
                                  std::to_string(resid.max_abs()));
  }
};

// mu_m = S^{-1/2} p_m rho_m S^{-1/2} with S the prior average; the part
// of the identity outside supp(S) becomes an explicit remainder outcome
inline Povm srm(const StateEnsemble& e) {
  e.validate_ensemble();
  CMatrix s(e.dim, e.dim);
  for (std::size_t m = 0; m < e.states.size(); ++m)
    s += e.states[m] * cplx(e.priors[m], 0.0);
  const CMatrix inv_sqrt = psd_inv_sqrt(s);

  Povm p;
  p.dim = e.dim;
  CMatrix total(e.dim, e.dim);
  for (std::size_t m = 0; m < e.states.size(); ++m) {
    CMatrix el = inv_sqrt * (e.states[m] * cplx(e.priors[m], 0.0)) * inv_sqrt;
    // symmetrize away the eigensolver's round-off
    el = (el + el.adjoint()) * cplx(0.5, 0.0);
    total += el;
    p.labels.push_back(e.labels[m]);
    p.elements.push_back(std::move(el));
  }
  p.labels.push_back(kPovmRemainderLabel);
  p.elements.push_back(CMatrix::identity(e.dim) - total);
  p.validate_povm();
  return p;
}

// 1 - sum_m p_m tr(mu_m rho_m); the remainder outcome never matches a
// message label, so its mass counts as error automatically
inline double error_probability(const Povm& povm, const StateEnsemble& e) {
  if (povm.dim != e.dim) throw std::invalid_argument("POVM/ensemble dim mismatch");
  double correct = 0.0;
  for (std::size_t m = 0; m < e.labels.size(); ++m) {
    std::size_t at = povm.labels.size();
    for (std::size_t j = 0; j < povm.labels.size(); ++j)
      if (povm.labels[j] == e.labels[m]) at = j;
    if (at == povm.labels.size())
      throw std::invalid_argument("POVM lacks outcome for label " + e.labels[m]);
    correct += e.priors[m] * (povm.elements[at] * e.states[m]).trace().real();
  }
  return std::min(1.0, std::max(0.0, 1.0 - correct));
}

// tensor-power conditional states of input sequences, reduced to one
// receiver; letters are partial-traced before taking the product
inline StateEnsemble codebook_ensemble(
    const CqBroadcastChannel& ch,
    const std::vector<std::pair<std::string, std::vector<std::size_t>>>& words,
    std::size_t rx, const std::vector<double>& priors) {
  ch.validate_channel();
  if (rx >= 3) throw std::invalid_argument("receiver index out of range");
  if (words.empty() || words.size() != priors.size())
    throw std::invalid_argument("codebook/prior sizes disagree");
  const std::size_t n = words.front().second.size();
  const std::size_t d = ch.out_space.dims[rx];
  std::size_t dim = 1;
  for (std::size_t t = 0; t < n; ++t) {
    dim *= d;
    if (dim > kSrmDimCap) throw std::invalid_argument("dimension cap exceeded");
  }

  std::vector<CMatrix> letter;
  for (const auto& st : ch.states)
    letter.push_back(partial_trace(st.matrix, ch.out_space, {rx}));

  StateEnsemble e;
  e.dim = dim;
  e.priors = priors;
  for (const auto& [label, xs] : words) {
    if (xs.size() != n) throw std::invalid_argument("ragged codebook");
    CMatrix acc = CMatrix::identity(1);
    for (std::size_t x : xs) {
      if (x >= ch.inputs.size())
        throw std::invalid_argument("input index out of range");
      acc = kron(acc, letter[x]);
    }
    e.labels.push_back(label);
    e.states.push_back(std::move(acc));
  }
  e.validate_ensemble();
  return e;
}

struct GroupDecoderResult {
  Povm decoder;          // outcomes labeled by the sum message
  double group_error;    // SRM over averaged group states
  double pair_error;     // decode the (m2, m3) pair, then sum
  std::size_t dim = 0;
};

namespace detail {

inline std::string vec_label(const FieldVec& v) {
  std::string s;
  for (int x : v) s += std::to_string(x);
  return s;
}

}  // namespace detail

// Receiver 1 recovers only m2 + m3. All message pairs and inner indices
// are enumerated; pairs with equal message sum share one averaged state,
// and the SRM is built over those groups. The pair-decoding alternative
// (SRM over pairs, outcome mapped through the sum) is computed on the
// same ensemble for comparison.
inline GroupDecoderResult sum_group_decoder(
    const CqBroadcastChannel& ch, const NestedCosetCode& c2,
    const NestedCosetCode& c3,
    const std::function<std::size_t(int, int)>& input_of,
    const std::vector<double>& pair_priors = {}) {
  ch.validate_channel();
  c2.validate();
  c3.validate();
  if (!generator_prefix_of(c2, c3) && !generator_prefix_of(c3, c2))
    throw std::invalid_argument("codes are not sum-coset related");
  const PrimeField f(c2.upsilon);
  const std::size_t npairs =
      static_cast<std::size_t>(std::pow(f.size(), static_cast<double>(c2.l + c3.l)));
  std::vector<double> priors = pair_priors;
  if (priors.empty())
    priors.assign(npairs, 1.0 / static_cast<double>(npairs));
  if (priors.size() != npairs)
    throw std::invalid_argument("pair prior count mismatch");

  auto unrank = [&](std::size_t r, int len) {
    FieldVec v(static_cast<std::size_t>(len));
    for (std::size_t i = static_cast<std::size_t>(len); i-- > 0;) {
      v[i] = static_cast<int>(r % static_cast<std::size_t>(f.size()));
      r /= static_cast<std::size_t>(f.size());
    }
    return v;
  };
  const std::size_t na2 = static_cast<std::size_t>(std::pow(f.size(), c2.k));
  const std::size_t na3 = static_cast<std::size_t>(std::pow(f.size(), c3.k));

  // conditional Y1 state of one (u2, u3) word pair
  std::vector<CMatrix> letter;
  for (const auto& st : ch.states)
    letter.push_back(partial_trace(st.matrix, ch.out_space, {0}));
  const std::size_t d = ch.out_space.dims[0];
  std::size_t dim = 1;
  for (std::size_t t = 0; t < c2.n; ++t) {
    dim *= d;
    if (dim > kSrmDimCap) throw std::invalid_argument("dimension cap exceeded");
  }
  auto word_state = [&](const FieldVec& u2, const FieldVec& u3) {
    CMatrix acc = CMatrix::identity(1);
    for (std::size_t t = 0; t < u2.size(); ++t)
      acc = kron(acc, letter[input_of(u2[t], u3[t])]);
    return acc;
  };

  // pair ensemble (inner indices averaged) and sum-grouped ensemble
  StateEnsemble pairs, groups;
  pairs.dim = groups.dim = dim;
  std::map<std::string, CMatrix> group_acc;
  std::map<std::string, double> group_p;
  std::map<std::string, std::string> pair_to_sum;
  const double inner_w = 1.0 / static_cast<double>(na2 * na3);
  for (std::size_t r = 0; r < npairs; ++r) {
    const std::size_t r3 = r % static_cast<std::size_t>(std::pow(f.size(), c3.l));
    const std::size_t r2 = r / static_cast<std::size_t>(std::pow(f.size(), c3.l));
    const FieldVec m2 = unrank(r2, c2.l), m3 = unrank(r3, c3.l);
    CMatrix avg(dim, dim);
    for (std::size_t a2 = 0; a2 < na2; ++a2)
      for (std::size_t a3 = 0; a3 < na3; ++a3) {
        const FieldVec u2 = ncc_codeword(c2, unrank(a2, c2.k), m2);
        const FieldVec u3 = ncc_codeword(c3, unrank(a3, c3.k), m3);
        avg += word_state(u2, u3) * cplx(inner_w, 0.0);
      }
    const std::string plabel =
        detail::vec_label(m2) + "|" + detail::vec_label(m3);
    const auto [sum_code, msum] = sum_coset(c2, c3, m2, m3);
    const std::string slabel = detail::vec_label(msum);
    pairs.labels.push_back(plabel);
    pairs.priors.push_back(priors[r]);
    pairs.states.push_back(avg);
    pair_to_sum[plabel] = slabel;
    auto it = group_acc.find(slabel);
    if (it == group_acc.end()) {
      group_acc.emplace(slabel, avg * cplx(priors[r], 0.0));
      group_p[slabel] = priors[r];
    } else {
      it->second += avg * cplx(priors[r], 0.0);
      group_p[slabel] += priors[r];
    }
  }
  for (const auto& [slabel, p] : group_p) {
    groups.labels.push_back(slabel);
    groups.priors.push_back(p);
    groups.states.push_back(group_acc.at(slabel) * cplx(1.0 / p, 0.0));
  }

  GroupDecoderResult res;
  res.dim = dim;
  res.decoder = srm(groups);
  res.group_error = error_probability(res.decoder, groups);

  // pair decoder: correct whenever the decoded pair has the right sum
  const Povm pair_povm = srm(pairs);
  double correct = 0.0;
  for (std::size_t m = 0; m < pairs.labels.size(); ++m) {
    const std::string& want = pair_to_sum.at(pairs.labels[m]);
    for (std::size_t j = 0; j + 1 < pair_povm.labels.size(); ++j) {
      if (pair_to_sum.at(pair_povm.labels[j]) != want) continue;
      correct += pairs.priors[m] *
                 (pair_povm.elements[j] * pairs.states[m]).trace().real();
    }
  }
  res.pair_error = std::min(1.0, std::max(0.0, 1.0 - correct));
  return res;
}

inline nlohmann::json to_json(const Povm& p) {
  nlohmann::json elems = nlohmann::json::array();
  for (std::size_t i = 0; i < p.labels.size(); ++i) {
    const auto dec = jacobi_eigh(p.elements[i]);
    elems.push_back({{"label", p.labels[i]},
                     {"min_eig", dec.values.front()},
                     {"max_eig", dec.values.back()},
                     {"trace", p.elements[i].trace().real()}});
  }
  return {{"dim", p.dim}, {"elements", elems}};
}

}  // namespace cqbc
