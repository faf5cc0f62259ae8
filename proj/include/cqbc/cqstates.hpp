#pragma once

// Classical-quantum broadcast channel data model, auxiliary test-channel
// models, and the hybrid ensembles whose entropy terms feed the rate
// inequality systems. An ensemble is a PMF over classical label tuples
// with a conditional output state per tuple; entropies of any subset of
// classical coordinates (possibly field-linear combinations of them)
// joint with any subset of output factors are computed through the block
// decomposition H(C, Y) = H(p_C) + sum_c p(c) S(rho_c).

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "cqbc/gf.hpp"
#include "cqbc/quantum.hpp"

namespace cqbc {

inline constexpr double kPmfTol = 1e-12;
inline constexpr double kPmfSupportCutoff = 1e-15;

struct CqBroadcastChannel {
  std::vector<std::string> inputs;
  ProductSpace out_space;               // exactly three factors
  std::vector<DensityOperator> states;  // aligned with inputs
  std::vector<double> cost;             // aligned with inputs

  void validate_channel() const {
    if (out_space.dims.size() != 3)
      throw std::invalid_argument("channel needs exactly three output factors");
    if (inputs.empty()) throw std::invalid_argument("empty input alphabet");
    if (states.size() != inputs.size() || cost.size() != inputs.size())
      throw std::invalid_argument("channel field sizes disagree");
    const std::size_t dim = out_space.total();
    for (const auto& s : states)
      if (s.dim != dim) throw std::invalid_argument("channel state dimension mismatch");
    for (double k : cost)
      if (k < 0.0) throw std::invalid_argument("cost must be nonnegative");
  }

  std::size_t index_of(const std::string& x) const {
    for (std::size_t i = 0; i < inputs.size(); ++i)
      if (inputs[i] == x) return i;
    throw std::invalid_argument("unknown channel input " + x);
  }
};

inline nlohmann::json to_json(const CqBroadcastChannel& ch) {
  nlohmann::json states = nlohmann::json::object();
  nlohmann::json cost = nlohmann::json::object();
  for (std::size_t i = 0; i < ch.inputs.size(); ++i) {
    states[ch.inputs[i]] = matrix_to_json(ch.states[i].matrix);
    cost[ch.inputs[i]] = ch.cost[i];
  }
  return {{"inputs", ch.inputs},
          {"out_dims", ch.out_space.dims},
          {"states", states},
          {"cost", cost}};
}

inline CqBroadcastChannel channel_from_json(const nlohmann::json& j) {
  CqBroadcastChannel ch;
  ch.inputs = j.at("inputs").get<std::vector<std::string>>();
  ch.out_space.dims = j.at("out_dims").get<std::vector<std::size_t>>();
  for (const auto& x : ch.inputs) {
    ch.states.push_back(validate(matrix_from_json(j.at("states").at(x))));
    ch.cost.push_back(j.at("cost").value(x, 0.0));
  }
  ch.validate_channel();
  return ch;
}

struct RandomVariable {
  std::string name;
  int size = 1;
  bool is_field = false;  // alphabet is F_size with size prime
};

// Joint auxiliary hypothesis: named RVs, a joint PMF over their product
// alphabet (row-major), and a fusion map into the channel input alphabet
// (indices into CqBroadcastChannel::inputs; -1 allowed off the support).
struct AuxiliaryModel {
  std::vector<RandomVariable> rvs;
  std::vector<double> pmf;
  std::vector<int> fusion;

  std::size_t joint_size() const {
    std::size_t t = 1;
    for (const auto& rv : rvs) {
      if (rv.size < 1) throw std::invalid_argument("RV alphabet must be nonempty");
      t *= static_cast<std::size_t>(rv.size);
    }
    return t;
  }

  int rv_index(const std::string& name) const {
    for (std::size_t i = 0; i < rvs.size(); ++i)
      if (rvs[i].name == name) return static_cast<int>(i);
    return -1;
  }

  const RandomVariable& rv(const std::string& name) const {
    const int i = rv_index(name);
    if (i < 0) throw std::invalid_argument("model lacks random variable " + name);
    return rvs[static_cast<std::size_t>(i)];
  }

  std::vector<int> tuple_of(std::size_t flat) const {
    std::vector<int> t(rvs.size());
    for (std::size_t i = rvs.size(); i-- > 0;) {
      t[i] = static_cast<int>(flat % static_cast<std::size_t>(rvs[i].size));
      flat /= static_cast<std::size_t>(rvs[i].size);
    }
    return t;
  }

  void validate_model(const CqBroadcastChannel& ch) const {
    const std::size_t total = joint_size();
    if (pmf.size() != total || fusion.size() != total)
      throw std::invalid_argument("model PMF/fusion size mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
      if (pmf[i] < 0.0) throw std::invalid_argument("negative PMF entry");
      sum += pmf[i];
      if (pmf[i] > kPmfSupportCutoff &&
          (fusion[i] < 0 || fusion[i] >= static_cast<int>(ch.inputs.size())))
        throw std::invalid_argument("fusion undefined on a PMF support point");
    }
    if (std::abs(sum - 1.0) > kPmfTol)
      throw std::invalid_argument("PMF sums to " + std::to_string(sum));
    for (const auto& rv : rvs)
      if (rv.is_field && rv.size > 1) PrimeField(rv.size);  // size 1 = degenerate layer
  }
};

inline nlohmann::json to_json(const AuxiliaryModel& m) {
  nlohmann::json rvs = nlohmann::json::array();
  for (const auto& rv : m.rvs)
    rvs.push_back({{"name", rv.name}, {"size", rv.size}, {"field", rv.is_field}});
  return {{"rvs", rvs}, {"pmf", m.pmf}, {"fusion", m.fusion}};
}

inline AuxiliaryModel model_from_json(const nlohmann::json& j,
                                      const CqBroadcastChannel* ch = nullptr) {
  AuxiliaryModel m;
  for (const auto& rv : j.at("rvs"))
    m.rvs.push_back({rv.at("name").get<std::string>(), rv.at("size").get<int>(),
                     rv.value("field", false)});
  m.pmf = j.at("pmf").get<std::vector<double>>();
  for (const auto& fx : j.at("fusion")) {
    if (fx.is_string()) {
      if (!ch) throw std::invalid_argument("label-valued fusion needs a channel to resolve against");
      m.fusion.push_back(static_cast<int>(ch->index_of(fx.get<std::string>())));
    } else {
      m.fusion.push_back(fx.get<int>());
    }
  }
  if (ch) m.validate_model(*ch);
  return m;
}

// A classical label coordinate, or a field-linear combination
// coord[i] + theta * coord[k] mod `mod` of two coordinates.
struct DerivedCoord {
  int i = 0;
  int k = -1;
  int theta = 0;
  int mod = 0;

  int eval(const std::vector<int>& label) const {
    if (k < 0) return label[static_cast<std::size_t>(i)];
    return (label[static_cast<std::size_t>(i)] +
            theta * label[static_cast<std::size_t>(k)]) % mod;
  }

  int out_size(const std::vector<int>& coord_sizes) const {
    return k < 0 ? coord_sizes[static_cast<std::size_t>(i)] : mod;
  }
};

class CqEnsemble {
 public:
  std::vector<std::string> coord_names;
  std::vector<int> coord_sizes;
  std::vector<std::vector<int>> labels;  // support only
  std::vector<double> probs;
  std::vector<int> state_id;             // index into states
  std::vector<CMatrix> states;           // deduplicated conditional states
  ProductSpace out_space;

  CqEnsemble() : id_(next_id()++), cache_(std::make_shared<Cache>()) {}

  std::uint64_t id() const { return id_; }

  int coord(const std::string& name) const {
    for (std::size_t i = 0; i < coord_names.size(); ++i)
      if (coord_names[i] == name) return static_cast<int>(i);
    throw std::invalid_argument("ensemble lacks coordinate " + name);
  }

  void validate_ensemble() const {
    double sum = 0.0;
    for (double p : probs) {
      if (p < 0.0) throw std::invalid_argument("negative ensemble probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kPmfTol)
      throw std::invalid_argument("ensemble PMF sums to " + std::to_string(sum));
    for (const auto& l : labels)
      if (l.size() != coord_names.size())
        throw std::invalid_argument("label arity mismatch");
  }

  // caches are shared across copies; contents are value-idempotent
  struct Cache {
    std::mutex mutex;
    std::unordered_map<std::string, double> entropies;
    std::map<std::pair<int, unsigned>, CMatrix> reduced;
  };
  std::shared_ptr<Cache> cache_;

 private:
  static std::atomic<std::uint64_t>& next_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter;
  }
  std::uint64_t id_;
};

namespace detail {

inline std::string entropy_key(const std::vector<DerivedCoord>& coords,
                               unsigned qmask) {
  std::vector<std::string> parts;
  for (const auto& c : coords) {
    std::ostringstream os;
    if (c.k < 0)
      os << c.i;
    else
      os << c.i << "+" << c.theta << "*" << c.k << "%" << c.mod;
    parts.push_back(os.str());
  }
  std::sort(parts.begin(), parts.end());
  std::ostringstream os;
  for (const auto& p : parts) os << p << ";";
  os << "|" << qmask;
  return os.str();
}

inline const CMatrix& reduced_state(const CqEnsemble& e, int sid, unsigned qmask) {
  const auto key = std::make_pair(sid, qmask);
  std::lock_guard<std::mutex> lock(e.cache_->mutex);
  auto it = e.cache_->reduced.find(key);
  if (it != e.cache_->reduced.end()) return it->second;
  std::set<std::size_t> keep;
  for (std::size_t f = 0; f < 3; ++f)
    if (qmask & (1u << f)) keep.insert(f);
  CMatrix red = partial_trace(e.states[static_cast<std::size_t>(sid)], e.out_space, keep);
  return e.cache_->reduced.emplace(key, std::move(red)).first->second;
}

}  // namespace detail

// Joint entropy H(C, Y_q) in bits; `quantum` holds output factor indices
// 0..2. Classical coordinates may be derived linear combinations.
inline double cq_entropy(const CqEnsemble& e, const std::vector<DerivedCoord>& coords,
                         const std::set<std::size_t>& quantum) {
  unsigned qmask = 0;
  for (std::size_t f : quantum) {
    if (f >= 3) throw std::invalid_argument("output factor index out of range");
    qmask |= 1u << f;
  }
  for (const auto& c : coords) {
    if (c.i < 0 || c.i >= static_cast<int>(e.coord_names.size()) ||
        (c.k >= 0 && (c.k >= static_cast<int>(e.coord_names.size()) || c.mod < 2)))
      throw std::invalid_argument("unknown ensemble coordinate in entropy request");
  }

  const std::string key = detail::entropy_key(coords, qmask);
  {
    std::lock_guard<std::mutex> lock(e.cache_->mutex);
    auto it = e.cache_->entropies.find(key);
    if (it != e.cache_->entropies.end()) return it->second;
  }

  // group support points by the evaluated classical tuple
  std::map<std::vector<int>, double> group_p;
  std::map<std::vector<int>, std::map<int, double>> group_states;  // state id -> weight
  for (std::size_t s = 0; s < e.labels.size(); ++s) {
    if (e.probs[s] < kPmfSupportCutoff) continue;
    std::vector<int> cls(coords.size());
    for (std::size_t c = 0; c < coords.size(); ++c) cls[c] = coords[c].eval(e.labels[s]);
    group_p[cls] += e.probs[s];
    if (qmask) group_states[cls][e.state_id[s]] += e.probs[s];
  }

  double h = 0.0;
  for (const auto& [cls, p] : group_p) {
    if (p < kPmfSupportCutoff) continue;
    h -= p * std::log2(p);
    if (!qmask) continue;
    CMatrix avg;
    bool first = true;
    for (const auto& [sid, w] : group_states[cls]) {
      const CMatrix& red = detail::reduced_state(e, sid, qmask);
      if (first) {
        avg = red * cplx(w / p, 0.0);
        first = false;
      } else {
        avg += red * cplx(w / p, 0.0);
      }
    }
    h += p * von_neumann_entropy(avg);
  }

  std::lock_guard<std::mutex> lock(e.cache_->mutex);
  e.cache_->entropies.emplace(key, h);
  return h;
}

inline double cq_entropy(const CqEnsemble& e, const std::vector<std::string>& names,
                         const std::set<std::size_t>& quantum) {
  std::vector<DerivedCoord> coords;
  for (const auto& n : names) coords.push_back({e.coord(n)});
  return cq_entropy(e, coords, quantum);
}

// ---- ensemble builders --------------------------------------------------

namespace detail {

inline int dedup_state(CqEnsemble& e, const CqBroadcastChannel& ch, int input,
                       std::map<int, int>& seen) {
  auto it = seen.find(input);
  if (it != seen.end()) return it->second;
  const int sid = static_cast<int>(e.states.size());
  e.states.push_back(ch.states[static_cast<std::size_t>(input)].matrix);
  seen.emplace(input, sid);
  return sid;
}

inline void require_rvs(const AuxiliaryModel& m, const std::vector<std::string>& names) {
  if (m.rvs.size() != names.size())
    throw std::invalid_argument("model has wrong number of random variables");
  for (const auto& n : names) m.rv(n);
}

inline int field_size_pair(const AuxiliaryModel& m, const std::string& a,
                           const std::string& b) {
  const int sa = m.rv(a).size, sb = m.rv(b).size;
  if (sa != sb)
    throw std::invalid_argument(a + " and " + b + " must share an alphabet");
  if (sa > 1) (void)PrimeField(sa);
  return sa;
}

}  // namespace detail

// Ensemble over (u, u2, u3, v1, v2, v3) with u = u2 + u3 in F_upsilon.
inline CqEnsemble build_state_thm1(const AuxiliaryModel& model,
                                   const CqBroadcastChannel& ch) {
  ch.validate_channel();
  model.validate_model(ch);
  detail::require_rvs(model, {"U2", "U3", "V1", "V2", "V3"});
  const int ups = detail::field_size_pair(model, "U2", "U3");
  const int iu2 = model.rv_index("U2"), iu3 = model.rv_index("U3");

  CqEnsemble e;
  e.out_space = ch.out_space;
  e.coord_names = {"U", "U2", "U3", "V1", "V2", "V3"};
  e.coord_sizes = {ups, ups, ups, model.rv("V1").size, model.rv("V2").size,
                   model.rv("V3").size};
  std::map<int, int> seen;
  for (std::size_t flat = 0; flat < model.joint_size(); ++flat) {
    if (model.pmf[flat] < kPmfSupportCutoff) continue;
    const auto t = model.tuple_of(flat);
    const int u = (t[static_cast<std::size_t>(iu2)] + t[static_cast<std::size_t>(iu3)]) % ups;
    std::vector<int> label = {u,
                              t[static_cast<std::size_t>(iu2)],
                              t[static_cast<std::size_t>(iu3)],
                              t[static_cast<std::size_t>(model.rv_index("V1"))],
                              t[static_cast<std::size_t>(model.rv_index("V2"))],
                              t[static_cast<std::size_t>(model.rv_index("V3"))]};
    e.labels.push_back(std::move(label));
    e.probs.push_back(model.pmf[flat]);
    e.state_id.push_back(detail::dedup_state(e, ch, model.fusion[flat], seen));
  }
  e.validate_ensemble();
  return e;
}

inline const std::vector<std::string>& pair_names() {
  static const std::vector<std::string> names = {"12", "13", "21", "23", "31", "32"};
  return names;
}

namespace detail {

// shared core of the step-II / step-III builders; extra = leading RVs
// (W and the Q's for step III)
inline CqEnsemble build_state_upair(const AuxiliaryModel& model,
                                    const CqBroadcastChannel& ch,
                                    const std::vector<std::string>& extra) {
  ch.validate_channel();
  model.validate_model(ch);
  std::vector<std::string> wanted = extra;
  for (const auto& p : pair_names()) wanted.push_back("U" + p);
  for (int j = 1; j <= 3; ++j) wanted.push_back("V" + std::to_string(j));
  if (model.rv_index("X") >= 0) wanted.push_back("X");  // explicit input RV allowed
  require_rvs(model, wanted);
  // field of the pair codes summed at receiver j: upsilon_j
  const int ups1 = field_size_pair(model, "U21", "U31");
  const int ups2 = field_size_pair(model, "U12", "U32");
  const int ups3 = field_size_pair(model, "U13", "U23");

  CqEnsemble e;
  e.out_space = ch.out_space;
  for (const auto& n : extra) {
    e.coord_names.push_back(n);
    e.coord_sizes.push_back(model.rv(n).size);
  }
  for (const auto& p : pair_names()) {
    e.coord_names.push_back("U" + p);
    e.coord_sizes.push_back(model.rv("U" + p).size);
  }
  e.coord_names.insert(e.coord_names.end(), {"U1p", "U2p", "U3p"});
  e.coord_sizes.insert(e.coord_sizes.end(), {ups1, ups2, ups3});
  for (int j = 1; j <= 3; ++j) {
    e.coord_names.push_back("V" + std::to_string(j));
    e.coord_sizes.push_back(model.rv("V" + std::to_string(j)).size);
  }
  e.coord_names.push_back("X");
  e.coord_sizes.push_back(static_cast<int>(ch.inputs.size()));

  std::map<int, int> seen;
  for (std::size_t flat = 0; flat < model.joint_size(); ++flat) {
    if (model.pmf[flat] < kPmfSupportCutoff) continue;
    const auto t = model.tuple_of(flat);
    auto val = [&](const std::string& n) {
      return t[static_cast<std::size_t>(model.rv_index(n))];
    };
    std::vector<int> label;
    for (const auto& n : extra) label.push_back(val(n));
    for (const auto& p : pair_names()) label.push_back(val("U" + p));
    label.push_back((val("U21") + val("U31")) % ups1);
    label.push_back((val("U12") + val("U32")) % ups2);
    label.push_back((val("U13") + val("U23")) % ups3);
    for (int j = 1; j <= 3; ++j) label.push_back(val("V" + std::to_string(j)));
    label.push_back(model.fusion[flat]);
    e.labels.push_back(std::move(label));
    e.probs.push_back(model.pmf[flat]);
    e.state_id.push_back(dedup_state(e, ch, model.fusion[flat], seen));
  }
  e.validate_ensemble();
  return e;
}

}  // namespace detail

// Ensemble over (u_12..u_32, u1+, u2+, u3+, v1..v3, x) where
// uj+ = u_ij + u_kj over F_{upsilon_j}.
inline CqEnsemble build_state_stepII(const AuxiliaryModel& model,
                                     const CqBroadcastChannel& ch) {
  return detail::build_state_upair(model, ch, {});
}

// Step-III ensemble prepends the common cloud W and the per-pair Q's.
inline CqEnsemble build_state_stepIII(const AuxiliaryModel& model,
                                      const CqBroadcastChannel& ch) {
  std::vector<std::string> extra = {"W"};
  for (const auto& p : pair_names()) extra.push_back("Q" + p);
  return detail::build_state_upair(model, ch, extra);
}

inline double expected_cost(const AuxiliaryModel& model,
                            const CqBroadcastChannel& ch) {
  model.validate_model(ch);
  double c = 0.0;
  for (std::size_t flat = 0; flat < model.joint_size(); ++flat)
    if (model.pmf[flat] >= kPmfSupportCutoff)
      c += model.pmf[flat] * ch.cost[static_cast<std::size_t>(model.fusion[flat])];
  return c;
}

}  // namespace cqbc
