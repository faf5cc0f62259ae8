#pragma once

// The running three-receiver example: inputs x = (x1, x2, x3) in {0,1}^3,
// output state sigma_{d1}(x1+x2+x3) (x) beta2(x2) (x) beta3(x3), Hamming
// cost on x1. The commutative case uses classical bit-flip states for
// receivers 2, 3; the non-commuting case uses pure states at angles
// phi2 < phi3. Both workflows build the single-receiver-bivariate model
// (uniform U2, U3; V1 ~ Ber(tau); V2 = U2, V3 = U3; x = (v1, u2, u3))
// and test feasibility of the target rate triple.

#include "cqbc/regions.hpp"

namespace cqbc {

// (1-d)|1-x><1-x| + d|x><x|
inline CMatrix sigma_state(double delta, int x) {
  CMatrix m(2, 2);
  m(static_cast<std::size_t>(1 - x), static_cast<std::size_t>(1 - x)) = 1.0 - delta;
  m(static_cast<std::size_t>(x), static_cast<std::size_t>(x)) = delta;
  return m;
}

// |0><0| for x = 0, |v_phi><v_phi| for x = 1
inline CMatrix gamma_state(double phi, int x) {
  CMatrix m(2, 2);
  if (x == 0) {
    m(0, 0) = 1.0;
  } else {
    const double c = std::cos(phi), s = std::sin(phi);
    m(0, 0) = c * c;
    m(0, 1) = m(1, 0) = c * s;
    m(1, 1) = s * s;
  }
  return m;
}

namespace detail {

// input label "x1x2x3" at index x1*4 + x2*2 + x3
inline CqBroadcastChannel example1_channel(
    double delta1, const std::function<CMatrix(int)>& beta2,
    const std::function<CMatrix(int)>& beta3) {
  if (!(delta1 > 0.0 && delta1 < 0.5))
    throw std::invalid_argument("delta1 must lie in (0, 1/2)");
  CqBroadcastChannel ch;
  ch.out_space.dims = {2, 2, 2};
  for (int x1 = 0; x1 < 2; ++x1)
    for (int x2 = 0; x2 < 2; ++x2)
      for (int x3 = 0; x3 < 2; ++x3) {
        ch.inputs.push_back(std::to_string(x1) + std::to_string(x2) +
                            std::to_string(x3));
        const CMatrix st =
            kron(kron(sigma_state(delta1, x1 ^ x2 ^ x3), beta2(x2)), beta3(x3));
        ch.states.push_back(validate(st));
        ch.cost.push_back(static_cast<double>(x1));
      }
  ch.validate_channel();
  return ch;
}

}  // namespace detail

inline CqBroadcastChannel commutative_channel(double delta1, double delta) {
  if (!(delta > 0.0 && delta < 0.5))
    throw std::invalid_argument("delta must lie in (0, 1/2)");
  return detail::example1_channel(
      delta1, [delta](int x) { return sigma_state(delta, x); },
      [delta](int x) { return sigma_state(delta, x); });
}

inline CqBroadcastChannel noncommuting_channel(double delta1, double phi2,
                                               double phi3) {
  if (!(0.0 < phi2 && phi2 < phi3 && phi3 < std::acos(-1.0) / 2.0))
    throw std::invalid_argument("angles must satisfy 0 < phi2 < phi3 < pi/2");
  return detail::example1_channel(
      delta1, [phi2](int x) { return gamma_state(phi2, x); },
      [phi3](int x) { return gamma_state(phi3, x); });
}

// uniform independent U2, U3; V1 ~ Ber(tau) independent; V2 = U2,
// V3 = U3; fusion x = (v1, u2, u3)
inline AuxiliaryModel example1_model(double tau) {
  if (tau < 0.0 || tau > 0.5)
    throw std::invalid_argument("tau must lie in [0, 1/2]");
  AuxiliaryModel m;
  m.rvs = {{"U2", 2, true}, {"U3", 2, true}, {"V1", 2, false},
           {"V2", 2, false}, {"V3", 2, false}};
  m.pmf.assign(32, 0.0);
  m.fusion.assign(32, -1);
  for (std::size_t flat = 0; flat < 32; ++flat) {
    const auto t = m.tuple_of(flat);
    const int u2 = t[0], u3 = t[1], v1 = t[2], v2 = t[3], v3 = t[4];
    if (v2 != u2 || v3 != u3) continue;
    m.pmf[flat] = 0.25 * (v1 ? tau : 1.0 - tau);
    m.fusion[flat] = v1 * 4 + u2 * 2 + u3;
  }
  return m;
}

struct ExampleReport {
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
  bool conditions_hold = false;
  FeasibilityResult feas;
  nlohmann::json json;
};

inline ExampleReport example_commutative(double delta1, double tau, double delta) {
  const CqBroadcastChannel ch = commutative_channel(delta1, delta);
  const AuxiliaryModel model = example1_model(tau);

  ExampleReport rep;
  const double conv = binary_convolution(tau, delta1);
  rep.c1 = binary_entropy(conv) - binary_entropy(delta1);
  rep.c2 = rep.c3 = 1.0 - binary_entropy(delta);
  const bool cond_i = conv < delta;
  const bool cond_ii = binary_entropy(delta) < (1.0 + binary_entropy(conv)) / 2.0;
  rep.conditions_hold = cond_i && cond_ii;

  const InequalitySystem sys = thm1_system(model, ch);
  rep.feas = feasible(sys, RatePoint{rep.c1, rep.c2, rep.c3, tau});

  const double uc1 = 1.0 - binary_entropy(delta1);  // unconstrained Rx1 capacity
  rep.json = {
      {"case", "commutative"},
      {"delta1", delta1},
      {"tau", tau},
      {"delta", delta},
      {"tau_conv_delta1", conv},
      {"C1", rep.c1},
      {"C2", rep.c2},
      {"C3", rep.c3},
      {"condition_i", cond_i},
      {"condition_ii", cond_ii},
      {"expected_cost", expected_cost(model, ch)},
      {"feasible", rep.feas.status == FeasStatus::Feasible},
      {"boundary", rep.feas.boundary},
      {"margin", rep.feas.margin},
      {"unstructured_sum_rate_deficit", uc1 - (rep.c1 + rep.c2 + rep.c3)},
      {"sum_decoding_slack", uc1 - (rep.c1 + std::max(rep.c2, rep.c3))},
      {"system", to_json(sys)}};
  return rep;
}

inline ExampleReport example_noncommuting(double delta1, double tau, double phi2,
                                          double phi3) {
  const CqBroadcastChannel ch = noncommuting_channel(delta1, phi2, phi3);
  const AuxiliaryModel model = example1_model(tau);

  ExampleReport rep;
  const double conv = binary_convolution(tau, delta1);
  rep.c1 = binary_entropy(conv) - binary_entropy(delta1);
  rep.c2 = binary_entropy_tilde(std::cos(phi2));
  rep.c3 = binary_entropy_tilde(std::cos(phi3));
  const bool cond_a = binary_entropy(conv) + rep.c2 + rep.c3 > 1.0;
  const bool cond_b = 1.0 > binary_entropy(conv) + rep.c3;
  rep.conditions_hold = cond_a && cond_b;

  // eigensolver cross-check: the uniform two-state gamma ensemble average
  // has entropy h_b((1 + cos phi)/2)
  auto holevo = [&](double phi) {
    const CMatrix avg =
        (gamma_state(phi, 0) + gamma_state(phi, 1)) * cplx(0.5, 0.0);
    return von_neumann_entropy(avg);
  };
  const double hol2 = holevo(phi2), hol3 = holevo(phi3);

  const InequalitySystem sys = thm1_system(model, ch);
  rep.feas = feasible(sys, RatePoint{rep.c1, rep.c2, rep.c3, tau});

  rep.json = {{"case", "noncommuting"},
              {"delta1", delta1},
              {"tau", tau},
              {"phi2", phi2},
              {"phi3", phi3},
              {"tau_conv_delta1", conv},
              {"C1", rep.c1},
              {"C2", rep.c2},
              {"C3", rep.c3},
              {"condition_a", cond_a},
              {"condition_b", cond_b},
              {"holevo_phi2_eig", hol2},
              {"holevo_phi3_eig", hol3},
              {"holevo_phi2_analytic", rep.c2},
              {"holevo_phi3_analytic", rep.c3},
              {"expected_cost", expected_cost(model, ch)},
              {"feasible", rep.feas.status == FeasStatus::Feasible},
              {"boundary", rep.feas.boundary},
              {"margin", rep.feas.margin},
              {"system", to_json(sys)}};
  return rep;
}

}  // namespace cqbc
