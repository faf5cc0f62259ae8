#pragma once

// Rate-inequality systems for the three coding strategies, plus LP-based
// feasibility, rate maximization and region search. Rate variables
// R1,R2,R3 are part of the variable set; feasibility fixes them and asks
// for nonnegative auxiliary variables satisfying every constraint. Terms
// of the form max{S+T, S'+T'} are kept symbolic in `groups` and expanded
// into ordered linear branches at solve time.

#include <array>
#include <functional>
#include <iomanip>

#include "cqbc/cqstates.hpp"
#include "cqbc/lp.hpp"
#include "cqbc/rng.hpp"

namespace cqbc {

inline constexpr double kBoundaryTol = 1e-9;

struct RatePoint {
  double r1 = 0.0, r2 = 0.0, r3 = 0.0;
  double tau = 0.0;

  void validate_point() const {
    if (r1 < 0.0 || r2 < 0.0 || r3 < 0.0 || tau < 0.0)
      throw std::invalid_argument("rate-cost entries must be nonnegative");
  }
};

using LinExpr = std::map<std::string, double>;

struct MaxGroup {
  std::string name;
  std::vector<LinExpr> options;
};

struct LinearConstraint {
  LinExpr lhs;
  std::map<int, double> groups;  // max-group index -> coefficient on the lhs
  char sense = '<';              // '<' (<=), '>' (>=), '=' ; closures of the strict bounds
  double rhs = 0.0;
  std::string name;
  std::string provenance;  // entropy expression that produced rhs
};

struct InequalitySystem {
  std::vector<std::string> variables;  // all nonnegative
  std::vector<MaxGroup> groups;
  std::vector<LinearConstraint> constraints;
  nlohmann::json metadata;
};

// ---- entropy oracle -----------------------------------------------------

namespace detail {

// classical coordinate request: either a named ensemble coordinate or a
// field combination a + theta*b
struct CoordSpec {
  std::string a;
  std::string b;  // empty for a plain coordinate
  int theta = 1;
  int mod = 0;
};

class EntropyOracle {
 public:
  explicit EntropyOracle(const CqEnsemble& e) : e_(e) {}

  double joint(const std::vector<CoordSpec>& specs,
               const std::set<std::size_t>& q = {}) const {
    std::vector<DerivedCoord> coords;
    for (const auto& s : specs) {
      if (s.b.empty()) {
        const int i = e_.coord(s.a);
        if (e_.coord_sizes[static_cast<std::size_t>(i)] > 1) coords.push_back({i});
      } else {
        if (s.mod < 2) continue;  // trivial field, deterministic zero coordinate
        coords.push_back({e_.coord(s.a), e_.coord(s.b), s.theta, s.mod});
      }
    }
    return cq_entropy(e_, coords, q);
  }

  double named(const std::vector<std::string>& names,
               const std::set<std::size_t>& q = {}) const {
    std::vector<CoordSpec> specs;
    for (const auto& n : names) specs.push_back({n});
    return joint(specs, q);
  }

  double qonly(const std::set<std::size_t>& q) const {
    return joint(std::vector<CoordSpec>{}, q);
  }

  // H(A | B, Y_q) = H(A,B,Y_q) - H(B,Y_q)
  double cond(std::vector<CoordSpec> a, const std::vector<CoordSpec>& given,
              const std::set<std::size_t>& q = {}) const {
    const double hb = joint(given, q);
    a.insert(a.end(), given.begin(), given.end());
    return joint(a, q) - hb;
  }

  const CqEnsemble& ensemble() const { return e_; }

 private:
  const CqEnsemble& e_;
};

inline std::vector<CoordSpec> plain(const std::vector<std::string>& names) {
  std::vector<CoordSpec> s;
  for (const auto& n : names) s.push_back({n});
  return s;
}

// incremental construction with trivial variables forced to zero
class SystemBuilder {
 public:
  void declare(const std::string& name, bool active) {
    if (!active) return;
    if (active_.insert(name).second) sys_.variables.push_back(name);
  }

  bool is_active(const std::string& name) const { return active_.count(name) > 0; }

  LinExpr expr(std::initializer_list<std::pair<std::string, double>> terms) const {
    LinExpr e;
    for (const auto& [n, c] : terms)
      if (active_.count(n)) e[n] += c;
    return e;
  }

  void add_to(LinExpr& e, const std::string& name, double coeff = 1.0) const {
    if (active_.count(name)) e[name] += coeff;
  }

  int add_group(const std::string& name, std::vector<LinExpr> options) {
    sys_.groups.push_back({name, std::move(options)});
    return static_cast<int>(sys_.groups.size() - 1);
  }

  void add(LinExpr lhs, std::map<int, double> groups, char sense, double rhs,
           std::string name, std::string provenance) {
    // drop references to groups whose options are all empty
    for (auto it = groups.begin(); it != groups.end();) {
      bool empty = true;
      for (const auto& o : sys_.groups[static_cast<std::size_t>(it->first)].options)
        if (!o.empty()) empty = false;
      it = empty ? groups.erase(it) : std::next(it);
    }
    if (lhs.empty() && groups.empty()) {
      // constant row; verify it is vacuously satisfied and skip
      const bool ok = sense == '>' ? rhs <= kLpTol
                                   : (sense == '<' ? rhs >= -kLpTol : std::abs(rhs) <= kLpTol);
      if (!ok)
        throw std::runtime_error("inconsistent constant constraint: " + name);
      return;
    }
    sys_.constraints.push_back({std::move(lhs), std::move(groups), sense, rhs,
                                std::move(name), std::move(provenance)});
  }

  InequalitySystem take() { return std::move(sys_); }

 private:
  InequalitySystem sys_;
  std::set<std::string> active_;
};

inline std::string set_str(const std::vector<std::string>& items) {
  std::string s = "{";
  for (std::size_t i = 0; i < items.size(); ++i)
    s += (i ? "," : "") + items[i];
  return s + "}";
}

}  // namespace detail

// ---- Step I (single-receiver bivariate decoding) ------------------------

inline InequalitySystem thm1_system(const AuxiliaryModel& model,
                                    const CqBroadcastChannel& ch) {
  const CqEnsemble e = build_state_thm1(model, ch);
  const detail::EntropyOracle H(e);
  const int ups = model.rv("U2").size;
  if (ups < 2) throw std::invalid_argument("the shared field must be nontrivial");
  const double logv = std::log2(static_cast<double>(ups));

  detail::SystemBuilder b;
  for (const char* r : {"R1", "R2", "R3"}) b.declare(r, true);
  for (int j = 1; j <= 3; ++j) {
    const bool vj = model.rv("V" + std::to_string(j)).size > 1;
    b.declare("K" + std::to_string(j), vj);
    if (j > 1) b.declare("L" + std::to_string(j), vj);
  }
  for (int j = 2; j <= 3; ++j) {
    b.declare("S" + std::to_string(j), true);
    b.declare("T" + std::to_string(j), true);
  }

  const int g_max = b.add_group(
      "max{S2+T2,S3+T3}",
      {b.expr({{"S2", 1}, {"T2", 1}}), b.expr({{"S3", 1}, {"T3", 1}})});

  // (a) covering bounds: S_A + K_B >= |A| log v + sum_B H(V_b) - H(U_A, V_B)
  for (unsigned am = 0; am < 4; ++am) {
    for (unsigned bm = 0; bm < 8; ++bm) {
      if (!am && !bm) continue;
      LinExpr lhs;
      std::vector<std::string> ucoords, vcoords, anames, bnames;
      double rhs = 0.0;
      for (int a = 2; a <= 3; ++a)
        if (am & (1u << (a - 2))) {
          b.add_to(lhs, "S" + std::to_string(a));
          ucoords.push_back("U" + std::to_string(a));
          anames.push_back(std::to_string(a));
          rhs += logv;
        }
      for (int bb = 1; bb <= 3; ++bb)
        if (bm & (1u << (bb - 1))) {
          b.add_to(lhs, "K" + std::to_string(bb));
          vcoords.push_back("V" + std::to_string(bb));
          bnames.push_back(std::to_string(bb));
          rhs += H.named({"V" + std::to_string(bb)});
        }
      std::vector<std::string> all = ucoords;
      all.insert(all.end(), vcoords.begin(), vcoords.end());
      rhs -= H.named(all);
      b.add(lhs, {}, '>', rhs,
            "src A=" + detail::set_str(anames) + " B=" + detail::set_str(bnames),
            "|A|log v + sum_B H(V_b) - H(" + detail::set_str(all) + ")");
    }
  }

  // (b),(c): K_B + max{S2+T2,S3+T3} >= log v - min_theta H(U2+theta.U3)
  double min_all = std::numeric_limits<double>::infinity();
  double min_nonzero = std::numeric_limits<double>::infinity();
  for (int theta = 0; theta < ups; ++theta) {
    const double h = H.joint({{"U2", "U3", theta, ups}});
    min_all = std::min(min_all, h);
    if (theta != 0) min_nonzero = std::min(min_nonzero, h);
  }
  for (unsigned bm = 0; bm < 8; ++bm) {
    LinExpr lhs;
    std::vector<std::string> bnames;
    for (int bb = 1; bb <= 3; ++bb)
      if (bm & (1u << (bb - 1))) {
        b.add_to(lhs, "K" + std::to_string(bb));
        bnames.push_back(std::to_string(bb));
      }
    b.add(lhs, {{g_max, 1.0}}, '>', logv - min_all,
          "sum-cover B=" + detail::set_str(bnames),
          "log v - min_theta H(U2+theta.U3)");
  }

  // decoder 1
  {
    const double i_v1 = H.named({"V1"}) + H.named({"U"}, {0}) -
                        H.named({"V1", "U"}, {0});
    b.add(b.expr({{"R1", 1}, {"K1", 1}}), {}, '<', i_v1, "dec1 single",
          "I(V1;Y1,U2+U3)");
    const double rhs = H.named({"V1"}) -
                       (H.named({"V1", "U"}, {0}) - H.qonly({0})) + logv;
    b.add(b.expr({{"R1", 1}, {"K1", 1}}), {{g_max, 1.0}}, '<', rhs, "dec1 joint",
          "H(V1) - H(V1,U2+U3|Y1) + log v");
  }

  // decoders 2 and 3
  for (int j = 2; j <= 3; ++j) {
    const std::string J = std::to_string(j);
    const std::string uj = "U" + J, vj = "V" + J;
    const std::set<std::size_t> yj = {static_cast<std::size_t>(j - 1)};
    const double i_vj =
        H.named({vj}) + H.named({uj}, yj) - H.named({vj, uj}, yj);
    b.add(b.expr({{"L" + J, 1}, {"K" + J, 1}}), {}, '<', i_vj, "dec" + J + " V",
          "I(V" + J + ";Y" + J + ",U" + J + ")");
    const double h_u_cond =
        H.named({uj, vj}, yj) - H.named({vj}, yj);
    b.add(b.expr({{"S" + J, 1}, {"T" + J, 1}}), {}, '<', logv - h_u_cond,
          "dec" + J + " U", "log v - H(U" + J + "|Y" + J + ",V" + J + ")");
    const double h_uv_cond = H.named({uj, vj}, yj) - H.qonly(yj);
    b.add(b.expr({{"L" + J, 1}, {"K" + J, 1}, {"S" + J, 1}, {"T" + J, 1}}), {},
          '<', H.named({vj}) - h_uv_cond + logv, "dec" + J + " joint",
          "H(V" + J + ") - H(U" + J + ",V" + J + "|Y" + J + ") + log v");
    b.add(b.expr({{"R" + J, 1}, {"T" + J, -1}, {"L" + J, -1}}), {}, '=', 0.0,
          "rate split R" + J, "");
  }

  InequalitySystem sys = b.take();
  sys.metadata = {{"theorem", "thm1"},
                  {"upsilon", ups},
                  {"min_theta_all", min_all},
                  {"min_theta_nonzero", min_nonzero},
                  {"note", "strict bounds evaluated as closures"}};
  return sys;
}

// ---- Steps II and III ---------------------------------------------------

namespace detail {

struct PairInfo {
  std::string tag;  // "12", ...
  int owner;        // first index: whose message
  int rx;           // second index: receiver that decodes the sum
  int size;         // |U_tag|
};

inline std::vector<PairInfo> pair_infos(const AuxiliaryModel& model) {
  std::vector<PairInfo> ps;
  for (const auto& t : pair_names())
    ps.push_back({t, t[0] - '0', t[1] - '0', model.rv("U" + t).size});
  return ps;
}

// shared constraint emitter for the step-II and step-III systems; step II
// is the special case with no W and no Q layer
inline InequalitySystem build_step_system(const AuxiliaryModel& model,
                                          const CqBroadcastChannel& ch,
                                          bool with_wq) {
  const CqEnsemble e = with_wq ? build_state_stepIII(model, ch)
                               : build_state_stepII(model, ch);
  const EntropyOracle H(e);
  const auto pairs = pair_infos(model);
  auto pair_of = [&](const std::string& tag) -> const PairInfo& {
    for (const auto& p : pairs)
      if (p.tag == tag) return p;
    throw std::logic_error("unknown pair " + tag);
  };
  auto logu = [&](const PairInfo& p) {
    return std::log2(static_cast<double>(p.size));
  };
  std::array<int, 4> ups = {0, 0, 0, 0};  // field of the codes summed at Rx j
  for (int j = 1; j <= 3; ++j) {
    std::vector<const PairInfo*> at_j;
    for (const auto& p : pairs)
      if (p.rx == j) at_j.push_back(&p);
    if (at_j[0]->size != at_j[1]->size)
      throw std::invalid_argument("codes summed at a receiver must share a field");
    ups[static_cast<std::size_t>(j)] = at_j[0]->size;
  }

  const bool w_active = with_wq && model.rv("W").size > 1;
  const int w_size = with_wq ? model.rv("W").size : 1;

  SystemBuilder b;
  for (const char* r : {"R1", "R2", "R3"}) b.declare(r, true);
  for (int j = 1; j <= 3; ++j) {
    const bool vj = model.rv("V" + std::to_string(j)).size > 1;
    b.declare("K" + std::to_string(j), vj);
    b.declare("L" + std::to_string(j), vj);
  }
  for (const auto& p : pairs) {
    b.declare("S" + p.tag, p.size > 1);
    b.declare("T" + p.tag, p.size > 1);
  }
  if (with_wq) {
    b.declare("alpha", w_active);
    for (int j = 1; j <= 3; ++j) b.declare("alpha" + std::to_string(j), w_active);
    for (const auto& p : pairs) {
      const bool q = model.rv("Q" + p.tag).size > 1;
      b.declare("beta" + p.tag, q);
      b.declare("nu" + p.tag, q);
    }
  }

  // W-conditioning: include the W coordinate jointly and subtract H(W).
  // For step II the helpers reduce to unconditioned entropies.
  std::vector<CoordSpec> wspec;
  if (with_wq && w_size > 1) wspec.push_back({"W"});
  const double h_w = with_wq ? H.joint(wspec) : 0.0;
  auto Hw = [&](std::vector<CoordSpec> specs,
                const std::set<std::size_t>& q = {}) {
    specs.insert(specs.end(), wspec.begin(), wspec.end());
    return H.joint(specs, q) - (q.empty() ? h_w : 0.0);
    // note: with quantum factors present this helper returns H(.,W,Y_q),
    // callers subtract the conditioning block explicitly
  };

  // max groups: which of the two codes summed at Rx j has the larger coset
  std::array<int, 4> group_of = {-1, -1, -1, -1};
  for (int j = 1; j <= 3; ++j) {
    std::vector<LinExpr> opts;
    std::vector<std::string> tags;
    for (const auto& p : pairs)
      if (p.rx == j) {
        opts.push_back(b.expr({{"S" + p.tag, 1}, {"T" + p.tag, 1}}));
        tags.push_back(p.tag);
      }
    group_of[static_cast<std::size_t>(j)] = b.add_group(
        "max{S" + tags[0] + "+T" + tags[0] + ",S" + tags[1] + "+T" + tags[1] + "}",
        std::move(opts));
  }

  // active pair/Q index lists for subset enumeration
  std::vector<const PairInfo*> active_u;
  for (const auto& p : pairs)
    if (p.size > 1) active_u.push_back(&p);
  std::vector<const PairInfo*> active_q;
  if (with_wq)
    for (const auto& p : pairs)
      if (model.rv("Q" + p.tag).size > 1) active_q.push_back(&p);

  // ---- source (covering) bounds ----
  for (unsigned bmask = 0; bmask < 8; ++bmask) {
    std::vector<int> bset;
    for (int j = 1; j <= 3; ++j)
      if (bmask & (1u << (j - 1))) bset.push_back(j);
    // codes entering M_B may not reappear in A
    std::vector<const PairInfo*> a_pool;
    for (const auto* p : active_u) {
      bool excluded = false;
      for (int j : bset)
        if (p->rx == j) excluded = true;
      if (!excluded) a_pool.push_back(p);
    }
    // theta tuples over prod_{j in B} F_{ups_j}
    std::vector<std::vector<int>> thetas = {{}};
    for (int j : bset) {
      std::vector<std::vector<int>> next;
      const int u = std::max(1, ups[static_cast<std::size_t>(j)]);
      for (const auto& t : thetas)
        for (int th = 0; th < u; ++th) {
          next.push_back(t);
          next.back().push_back(th);
        }
      thetas = std::move(next);
    }

    for (unsigned amask = 0; amask < (1u << a_pool.size()); ++amask) {
      for (unsigned cmask = 0; cmask < 8; ++cmask) {
        const std::size_t dcount = with_wq ? (1u << active_q.size()) : 1;
        for (std::size_t dmask = 0; dmask < dcount; ++dmask) {
          LinExpr lhs;
          std::map<int, double> grp;
          double base = 0.0;
          std::vector<CoordSpec> fixed_coords;
          std::vector<std::string> anames, cnames, dnames, bnames;
          for (std::size_t ai = 0; ai < a_pool.size(); ++ai)
            if (amask & (1u << ai)) {
              const auto* p = a_pool[ai];
              b.add_to(lhs, "S" + p->tag);
              base += logu(*p);
              fixed_coords.push_back({"U" + p->tag});
              anames.push_back(p->tag);
            }
          for (int j : bset) {
            grp[group_of[static_cast<std::size_t>(j)]] += 1.0;
            base += std::log2(
                std::max(1.0, static_cast<double>(ups[static_cast<std::size_t>(j)])));
            bnames.push_back(std::to_string(j));
          }
          for (int c = 1; c <= 3; ++c)
            if (cmask & (1u << (c - 1))) {
              const std::string vc = "V" + std::to_string(c);
              b.add_to(lhs, "K" + std::to_string(c));
              base += Hw({{vc}});
              fixed_coords.push_back({vc});
              cnames.push_back(std::to_string(c));
            }
          if (with_wq)
            for (std::size_t di = 0; di < active_q.size(); ++di)
              if (dmask & (1u << di)) {
                const auto* p = active_q[di];
                b.add_to(lhs, "beta" + p->tag);
                base += Hw({{"Q" + p->tag}});
                fixed_coords.push_back({"Q" + p->tag});
                dnames.push_back(p->tag);
              }
          if (lhs.empty() && grp.empty() && fixed_coords.empty()) continue;

          double theta_max = -std::numeric_limits<double>::infinity();
          for (const auto& tvec : thetas) {
            std::vector<CoordSpec> coords = fixed_coords;
            for (std::size_t bi = 0; bi < bset.size(); ++bi) {
              const int j = bset[bi];
              std::vector<std::string> at_j;
              for (const auto& p : pairs)
                if (p.rx == j) at_j.push_back("U" + p.tag);
              coords.push_back({at_j[0], at_j[1], tvec[bi],
                                ups[static_cast<std::size_t>(j)]});
            }
            theta_max = std::max(theta_max, base - Hw(coords));
          }
          b.add(lhs, grp, '>', theta_max,
                "src A=" + set_str(anames) + " B=" + set_str(bnames) + " C=" +
                    set_str(cnames) +
                    (with_wq ? " D=" + set_str(dnames) : std::string()),
                "max_theta { sum log|U_a| + sum log v_j + sum H(V_c|W)"
                " + sum H(Q_d|W) - H(U_A, sums, V_C, Q_D|W) }");
        }
      }
    }
  }

  // ---- channel (packing) bounds at each receiver ----
  for (int j = 1; j <= 3; ++j) {
    const std::string J = std::to_string(j);
    const std::set<std::size_t> yj = {static_cast<std::size_t>(j - 1)};
    const std::string vj = "V" + J;
    const std::string ujp = "U" + J + "p";
    const bool sum_active = ups[static_cast<std::size_t>(j)] > 1;
    const double logv_j = std::log2(
        std::max(1.0, static_cast<double>(ups[static_cast<std::size_t>(j)])));
    std::vector<const PairInfo*> own, summed;
    for (const auto& p : pairs) {
      if (p.owner == j) own.push_back(&p);
      if (p.rx == j) summed.push_back(&p);
    }
    const bool v_active = model.rv(vj).size > 1;

    // entropy helper: joint of coords (plus W) with Y_j, minus a
    // conditioning joint (plus W) with Y_j
    auto condH = [&](std::vector<CoordSpec> a, std::vector<CoordSpec> given) {
      a.insert(a.end(), given.begin(), given.end());
      a.insert(a.end(), wspec.begin(), wspec.end());
      given.insert(given.end(), wspec.begin(), wspec.end());
      return H.joint(a, yj) - H.joint(given, yj);
    };

    const std::size_t ccount = with_wq ? 4 : 1;
    for (unsigned am = 0; am < 4; ++am) {
      std::vector<const PairInfo*> aj, ajc;
      for (std::size_t oi = 0; oi < own.size(); ++oi)
        (am & (1u << oi) ? aj : ajc).push_back(own[oi]);
      for (unsigned cm = 0; cm < ccount; ++cm) {
        std::vector<const PairInfo*> cj, cjc;
        for (std::size_t oi = 0; oi < own.size(); ++oi)
          (cm & (1u << oi) ? cj : cjc).push_back(own[oi]);

        LinExpr base_lhs;
        double base_rhs = 0.0;
        std::vector<CoordSpec> a_coords, ac_coords, q_coords, qc_coords;
        std::vector<std::string> ajnames, cjnames;
        for (const auto* p : aj) {
          b.add_to(base_lhs, "S" + p->tag);
          b.add_to(base_lhs, "T" + p->tag);
          base_rhs += logu(*p);
          a_coords.push_back({"U" + p->tag});
          ajnames.push_back(p->tag);
        }
        for (const auto* p : ajc) ac_coords.push_back({"U" + p->tag});
        if (with_wq) {
          for (const auto* p : cj) {
            b.add_to(base_lhs, "beta" + p->tag);
            b.add_to(base_lhs, "nu" + p->tag);
            q_coords.push_back({"Q" + p->tag});
            cjnames.push_back(p->tag);
          }
          for (const auto* p : cjc) qc_coords.push_back({"Q" + p->tag});
          // H(Q_Cj | Q_Cj^c, W)
          std::vector<CoordSpec> num = q_coords;
          num.insert(num.end(), qc_coords.begin(), qc_coords.end());
          base_rhs += Hw(num) - Hw(qc_coords);
        }
        const std::string tagbase =
            "rx" + J + " A=" + set_str(ajnames) +
            (with_wq ? " C=" + set_str(cjnames) : std::string());

        auto emit = [&](LinExpr extra, bool with_sum, bool with_v, double add,
                        const std::string& label, const std::string& prov) {
          LinExpr lhs = base_lhs;
          for (const auto& [n, c] : extra) lhs[n] += c;
          // joint block: U_Aj, Q_Cj, (V_j), (sum) | U_Aj^c, Q_Cj^c, (V_j), (sum), Y_j, W
          std::vector<CoordSpec> joint = a_coords, given = ac_coords;
          joint.insert(joint.end(), q_coords.begin(), q_coords.end());
          given.insert(given.end(), qc_coords.begin(), qc_coords.end());
          if (with_v)
            joint.push_back({vj});
          else
            given.push_back({vj});
          if (with_sum)
            joint.push_back({ujp});
          else
            given.push_back({ujp});
          const double rhs = base_rhs + add - condH(joint, given);
          b.add(lhs, {}, '<', rhs, tagbase + " " + label, prov);
        };

        // decode only the listed own codes
        emit({}, false, false, 0.0, "own",
             "sum log|U_a| [+H(Q|..)] - H(U_A,Q_C|rest,sum,Vj,Yj,W)");
        // also the interference sum, via either coset size
        for (const auto* p : summed) {
          if (!sum_active) continue;
          emit(b.expr({{"S" + p->tag, 1}, {"T" + p->tag, 1}}), true, false,
               logv_j, "own+sum(" + p->tag + ")",
               "... + log v_j - H(U_A,Q_C,sum|rest,Vj,Yj,W)");
        }
        // also the private codeword
        if (v_active)
          emit(b.expr({{"K" + J, 1}, {"L" + J, 1}}), false, true, Hw({{vj}}),
               "own+V", "... + H(Vj|W) - H(U_A,Q_C,Vj|rest,sum,Yj,W)");
        // private codeword and the sum
        for (const auto* p : summed) {
          if (!sum_active && !v_active) continue;
          LinExpr extra = b.expr({{"K" + J, 1}, {"L" + J, 1}});
          if (sum_active) {
            b.add_to(extra, "S" + p->tag);
            b.add_to(extra, "T" + p->tag);
          }
          emit(std::move(extra), sum_active, true,
               (sum_active ? logv_j : 0.0) + Hw({{vj}}),
               "own+V+sum(" + p->tag + ")",
               "... + log v_j + H(Vj|W) - H(U_A,Q_C,Vj,sum|rest,Yj,W)");
          if (!sum_active) break;
        }
      }
    }

    // public-layer decoder bounds: everything Rx j decodes, with the
    // cloud W inside the joint block
    if (with_wq) {
      LinExpr lhs = b.expr({{"alpha", 1}, {"K" + J, 1}, {"L" + J, 1}});
      double rhs = Hw({{vj}});
      std::vector<CoordSpec> joint;
      for (const auto* p : own) {
        b.add_to(lhs, "S" + p->tag);
        b.add_to(lhs, "T" + p->tag);
        b.add_to(lhs, "beta" + p->tag);
        b.add_to(lhs, "nu" + p->tag);
        rhs += logu(*p);
        joint.push_back({"U" + p->tag});
        joint.push_back({"Q" + p->tag});
      }
      {
        std::vector<CoordSpec> qown;
        for (const auto* p : own) qown.push_back({"Q" + p->tag});
        rhs += Hw(qown);  // H(Q_ji, Q_jk | W)
      }
      joint.push_back({vj});
      // conditioned on Y_j and the sum; W sits inside the joint block
      std::vector<CoordSpec> jw = joint;
      jw.insert(jw.end(), wspec.begin(), wspec.end());
      std::vector<CoordSpec> given_sum = {{ujp}};
      {
        std::vector<CoordSpec> jws = jw;
        jws.insert(jws.end(), given_sum.begin(), given_sum.end());
        const double cond =
            H.joint(jws, yj) - H.joint(given_sum, yj);
        b.add(lhs, {}, '<', rhs - cond, "rx" + J + " public",
              "log(v_i v_k)+H(Qj*|W)+H(Vj|W)-H(Uj*,Qj*,W,Vj|Yj,sum)");
      }
      for (const auto* p : summed) {
        if (!sum_active) continue;
        LinExpr lhs2 = lhs;
        b.add_to(lhs2, "S" + p->tag);
        b.add_to(lhs2, "T" + p->tag);
        std::vector<CoordSpec> jws = jw;
        jws.push_back({ujp});
        const double cond = H.joint(jws, yj) - H.qonly( yj);
        b.add(lhs2, {}, '<', rhs + logv_j - cond,
              "rx" + J + " public+sum(" + p->tag + ")",
              "... + log v_j - H(Uj*,Qj*,W,Vj,sum|Yj)");
      }
    }

    // rate split
    LinExpr split = b.expr({{"R" + J, 1}, {"L" + J, -1}});
    for (const auto* p : own) b.add_to(split, "T" + p->tag, -1.0);
    if (with_wq) {
      b.add_to(split, "alpha" + J, -1.0);
      for (const auto* p : own) b.add_to(split, "nu" + p->tag, -1.0);
    }
    b.add(split, {}, '=', 0.0, "rate split R" + J, "");
  }

  if (with_wq) {
    for (int j = 1; j <= 3; ++j) {
      LinExpr lhs = b.expr({{"alpha", 1}, {"alpha" + std::to_string(j), -1}});
      if (!lhs.empty())
        b.add(lhs, {}, '>', 0.0, "cloud rate alpha>=alpha" + std::to_string(j), "");
    }
  }

  InequalitySystem sys = b.take();
  sys.metadata = {
      {"theorem", with_wq ? "stepIII" : "stepII"},
      {"note", "strict bounds evaluated as closures"},
      {"ambiguities",
       with_wq
           ? nlohmann::json::array(
                 {"final public bounds read S_ij+K_ij as S_ij+T_ij",
                  "theta-sum terms follow the step-II index pattern U_ij+theta_j.U_kj",
                  "Q_D included in the joint entropy of the covering bound",
                  "log v_j added to the rhs of the public+sum bounds to match the"
                  " step-II pattern"})
           : nlohmann::json::array(
                 {"A(B) exclusion taken over the codes entering M_B (second index)"})}};
  return sys;
}

}  // namespace detail

inline InequalitySystem stepII_system(const AuxiliaryModel& model,
                                      const CqBroadcastChannel& ch) {
  return detail::build_step_system(model, ch, false);
}

inline InequalitySystem stepIII_system(const AuxiliaryModel& model,
                                       const CqBroadcastChannel& ch) {
  return detail::build_step_system(model, ch, true);
}

enum class Theorem { Thm1, StepII, StepIII };

inline Theorem detect_theorem(const AuxiliaryModel& model) {
  if (model.rv_index("W") >= 0) return Theorem::StepIII;
  if (model.rv_index("U12") >= 0) return Theorem::StepII;
  return Theorem::Thm1;
}

inline InequalitySystem build_system(const AuxiliaryModel& model,
                                     const CqBroadcastChannel& ch) {
  switch (detect_theorem(model)) {
    case Theorem::Thm1:
      return thm1_system(model, ch);
    case Theorem::StepII:
      return stepII_system(model, ch);
    default:
      return stepIII_system(model, ch);
  }
}

// ---- canonical form and system comparison -------------------------------

namespace detail {

inline std::string constraint_key(const LinearConstraint& c) {
  std::ostringstream os;
  os << c.sense << "|";
  for (const auto& [n, v] : c.lhs)
    if (std::abs(v) > 1e-12) os << n << ":" << std::setprecision(17) << v << ",";
  os << "|";
  for (const auto& [g, v] : c.groups)
    if (std::abs(v) > 1e-12) os << g << ":" << std::setprecision(17) << v << ",";
  return os.str();
}

}  // namespace detail

// duplicate rows merged, dominated rhs values dropped, deterministic order
inline std::vector<LinearConstraint> canonical_constraints(
    const InequalitySystem& sys) {
  std::map<std::string, LinearConstraint> merged;
  for (const auto& c : sys.constraints) {
    std::string key = detail::constraint_key(c);
    if (c.sense == '=') {
      std::ostringstream os;
      os << key << "=" << std::setprecision(17) << c.rhs;
      key = os.str();
    }
    auto it = merged.find(key);
    if (it == merged.end()) {
      merged.emplace(std::move(key), c);
    } else if (c.sense == '>' ? c.rhs > it->second.rhs
                              : (c.sense == '<' && c.rhs < it->second.rhs)) {
      it->second = c;
    }
  }
  std::vector<LinearConstraint> out;
  for (auto& [k, c] : merged) out.push_back(std::move(c));
  return out;
}

inline bool systems_match(const InequalitySystem& a, const InequalitySystem& b,
                          double tol, std::string* why = nullptr) {
  const auto ca = canonical_constraints(a);
  const auto cb = canonical_constraints(b);
  auto complain = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (std::set<std::string>(a.variables.begin(), a.variables.end()) !=
      std::set<std::string>(b.variables.begin(), b.variables.end()))
    return complain("variable sets differ");
  if (ca.size() != cb.size())
    return complain("constraint counts differ: " + std::to_string(ca.size()) +
                    " vs " + std::to_string(cb.size()));
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (detail::constraint_key(ca[i]) != detail::constraint_key(cb[i]))
      return complain("constraint " + std::to_string(i) + " coefficients differ: " +
                      ca[i].name + " vs " + cb[i].name);
    if (std::abs(ca[i].rhs - cb[i].rhs) > tol)
      return complain("constraint " + std::to_string(i) + " rhs differ: " +
                      ca[i].name + " " + std::to_string(ca[i].rhs) + " vs " +
                      std::to_string(cb[i].rhs));
  }
  return true;
}

// ---- LP evaluation ------------------------------------------------------

enum class FeasStatus { Feasible, Infeasible, Indeterminate };

struct FeasibilityResult {
  FeasStatus status = FeasStatus::Indeterminate;
  bool boundary = false;
  double margin = 0.0;  // best attainable minimum slack over the inequalities
  std::string detail;
};

namespace detail {

struct BranchContext {
  std::vector<std::string> vars;            // LP structural variables
  std::map<std::string, std::size_t> index;
  std::map<std::string, double> fixed;      // substituted rate values
};

// effective option lists after dropping empty duplicates
inline std::vector<std::vector<LinExpr>> effective_groups(
    const InequalitySystem& sys) {
  std::vector<std::vector<LinExpr>> out;
  for (const auto& g : sys.groups) {
    std::vector<LinExpr> opts;
    for (const auto& o : g.options)
      if (std::find(opts.begin(), opts.end(), o) == opts.end()) opts.push_back(o);
    out.push_back(std::move(opts));
  }
  return out;
}

// builds the LP for one branch choice; `margin_var` appends a variable
// measuring the minimum slack across real inequality rows
inline LpProblem branch_lp(const InequalitySystem& sys,
                           const std::vector<std::vector<LinExpr>>& groups,
                           const std::vector<std::size_t>& choice,
                           const BranchContext& ctx,
                           const std::vector<double>& objective_on,
                           bool margin_var) {
  LpProblem lp;
  const std::size_t nv = ctx.vars.size();
  lp.nvars = nv + (margin_var ? 1 : 0);
  lp.c.assign(lp.nvars, 0.0);
  for (std::size_t i = 0; i < objective_on.size() && i < nv; ++i)
    lp.c[i] = objective_on[i];
  if (margin_var) lp.c[nv] = 1.0;

  auto add_row = [&](const LinExpr& expr, char sense, double rhs, bool real) {
    std::vector<double> row(lp.nvars, 0.0);
    double shift = 0.0;
    for (const auto& [n, c] : expr) {
      auto fx = ctx.fixed.find(n);
      if (fx != ctx.fixed.end()) {
        shift += c * fx->second;
      } else {
        row[ctx.index.at(n)] += c;
      }
    }
    if (margin_var && real && sense != '=')
      row[nv] = sense == '>' ? -1.0 : 1.0;
    lp.a.push_back(std::move(row));
    lp.b.push_back(rhs - shift);
    lp.sense.push_back(sense);
  };

  for (const auto& c : sys.constraints) {
    LinExpr expr = c.lhs;
    for (const auto& [g, coeff] : c.groups) {
      const auto& opts = groups[static_cast<std::size_t>(g)];
      const LinExpr& chosen = opts[choice[static_cast<std::size_t>(g)]];
      for (const auto& [n, v] : chosen) expr[n] += coeff * v;
    }
    add_row(expr, c.sense, c.rhs, true);
  }
  // ordering rows making the chosen option the max
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& opts = groups[g];
    if (opts.size() < 2) continue;
    for (std::size_t o = 0; o < opts.size(); ++o) {
      if (o == choice[g]) continue;
      LinExpr diff = opts[choice[g]];
      for (const auto& [n, v] : opts[o]) diff[n] -= v;
      add_row(diff, '>', 0.0, false);
    }
  }
  if (margin_var) {
    // keep the margin bounded
    std::vector<double> row(lp.nvars, 0.0);
    row[nv] = 1.0;
    lp.a.push_back(std::move(row));
    lp.b.push_back(1.0);
    lp.sense.push_back('<');
  }
  return lp;
}

inline BranchContext make_context(const InequalitySystem& sys,
                                  const std::map<std::string, double>& fixed) {
  BranchContext ctx;
  ctx.fixed = fixed;
  for (const auto& v : sys.variables)
    if (!fixed.count(v)) {
      ctx.index[v] = ctx.vars.size();
      ctx.vars.push_back(v);
    }
  return ctx;
}

inline std::vector<std::vector<std::size_t>> branch_choices(
    const std::vector<std::vector<LinExpr>>& groups) {
  std::vector<std::vector<std::size_t>> out = {{}};
  for (const auto& g : groups) {
    std::vector<std::vector<std::size_t>> next;
    const std::size_t n = std::max<std::size_t>(1, g.size());
    for (const auto& c : out)
      for (std::size_t o = 0; o < n; ++o) {
        next.push_back(c);
        next.back().push_back(o);
      }
    out = std::move(next);
  }
  return out;
}

}  // namespace detail

inline FeasibilityResult feasible(const InequalitySystem& sys, const RatePoint& p) {
  p.validate_point();
  const auto groups = detail::effective_groups(sys);
  const auto ctx = detail::make_context(
      sys, {{"R1", p.r1}, {"R2", p.r2}, {"R3", p.r3}});
  FeasibilityResult res;
  res.status = FeasStatus::Infeasible;
  bool trouble = false;
  for (const auto& choice : detail::branch_choices(groups)) {
    const LpProblem lp =
        detail::branch_lp(sys, groups, choice, ctx, {}, /*margin_var=*/true);
    const LpSolution sol = simplex_solve(lp);
    if (sol.status == LpStatus::Optimal) {
      res.status = FeasStatus::Feasible;
      res.margin = std::max(res.margin, sol.objective);
      if (res.margin > kBoundaryTol) break;
    } else if (sol.status != LpStatus::Infeasible) {
      trouble = true;
      res.detail = "LP returned " +
                   std::string(sol.status == LpStatus::Unbounded ? "unbounded"
                                                                 : "iteration limit");
    }
  }
  if (res.status == FeasStatus::Feasible) {
    res.boundary = res.margin <= kBoundaryTol;
  } else if (trouble) {
    res.status = FeasStatus::Indeterminate;
  }
  return res;
}

// boolean fast path: phase-1 only, stops at the first feasible branch and
// skips the boundary-margin maximization
inline bool is_feasible(const InequalitySystem& sys, const RatePoint& p) {
  p.validate_point();
  const auto groups = detail::effective_groups(sys);
  const auto ctx = detail::make_context(
      sys, {{"R1", p.r1}, {"R2", p.r2}, {"R3", p.r3}});
  for (const auto& choice : detail::branch_choices(groups)) {
    const LpProblem lp =
        detail::branch_lp(sys, groups, choice, ctx, {}, /*margin_var=*/false);
    if (simplex_solve(lp).status == LpStatus::Optimal) return true;
  }
  return false;
}

// maximize the named rate with the other two fixed
struct MaxRateResult {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
};

inline MaxRateResult max_rate(const InequalitySystem& sys,
                              const std::string& free_rate,
                              const std::map<std::string, double>& fixed_rates) {
  const auto groups = detail::effective_groups(sys);
  const auto ctx = detail::make_context(sys, fixed_rates);
  if (!ctx.index.count(free_rate))
    throw std::invalid_argument("free rate " + free_rate + " is fixed or unknown");
  std::vector<double> obj(ctx.vars.size(), 0.0);
  obj[ctx.index.at(free_rate)] = 1.0;

  MaxRateResult best;
  for (const auto& choice : detail::branch_choices(groups)) {
    const LpProblem lp =
        detail::branch_lp(sys, groups, choice, ctx, obj, /*margin_var=*/false);
    const LpSolution sol = simplex_solve(lp);
    if (sol.status == LpStatus::Optimal) {
      if (best.status != LpStatus::Optimal || sol.objective > best.value) {
        best.status = LpStatus::Optimal;
        best.value = sol.objective;
      }
    } else if (sol.status == LpStatus::Unbounded) {
      return {LpStatus::Unbounded, std::numeric_limits<double>::infinity()};
    } else if (sol.status == LpStatus::IterLimit &&
               best.status == LpStatus::Infeasible) {
      best.status = LpStatus::IterLimit;
    }
  }
  return best;
}

// ---- region search ------------------------------------------------------

struct ModelEntry {
  std::string id;
  AuxiliaryModel model;
};

struct RegionSample {
  std::string model_id;
  double r1 = 0.0, r2 = 0.0, r3 = 0.0;
  bool feasible = false;
  bool boundary = false;
};

struct RegionResult {
  std::vector<RegionSample> samples;
  std::vector<std::array<double, 3>> hull;  // extreme points of the feasible union
};

namespace detail {

// q is extreme iff it is not a convex combination of the other points
inline bool is_extreme(const std::vector<std::array<double, 3>>& pts,
                       std::size_t qi) {
  if (pts.size() <= 1) return true;
  LpProblem lp;
  lp.nvars = pts.size() - 1;
  lp.c.assign(lp.nvars, 0.0);
  for (int d = 0; d < 3; ++d) {
    std::vector<double> row;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (i != qi) row.push_back(pts[i][static_cast<std::size_t>(d)]);
    lp.a.push_back(std::move(row));
    lp.b.push_back(pts[qi][static_cast<std::size_t>(d)]);
    lp.sense.push_back('=');
  }
  lp.a.push_back(std::vector<double>(lp.nvars, 1.0));
  lp.b.push_back(1.0);
  lp.sense.push_back('=');
  return simplex_solve(lp).status == LpStatus::Infeasible;
}

}  // namespace detail

inline RegionResult search_region(const CqBroadcastChannel& ch,
                                  std::vector<ModelEntry> family,
                                  std::size_t budget, std::uint64_t seed,
                                  bool grid = true) {
  if (family.empty()) throw std::invalid_argument("empty model family");
  std::sort(family.begin(), family.end(),
            [](const ModelEntry& a, const ModelEntry& b) { return a.id < b.id; });

  RegionResult out;
  for (const auto& entry : family) {
    const InequalitySystem sys = build_system(entry.model, ch);
    std::array<double, 3> axis_max = {0.0, 0.0, 0.0};
    const std::array<std::string, 3> rn = {"R1", "R2", "R3"};
    for (int d = 0; d < 3; ++d) {
      std::map<std::string, double> fixed;
      for (int o = 0; o < 3; ++o)
        if (o != d) fixed[rn[static_cast<std::size_t>(o)]] = 0.0;
      const auto mr = max_rate(sys, rn[static_cast<std::size_t>(d)], fixed);
      axis_max[static_cast<std::size_t>(d)] =
          mr.status == LpStatus::Optimal ? mr.value : 0.0;
    }

    std::vector<std::array<double, 3>> pts;
    for (int d = 0; d < 3; ++d) {
      std::array<double, 3> corner = {0.0, 0.0, 0.0};
      corner[static_cast<std::size_t>(d)] = axis_max[static_cast<std::size_t>(d)];
      pts.push_back(corner);
    }
    if (grid) {
      const std::size_t g = std::max<std::size_t>(
          2, static_cast<std::size_t>(std::cbrt(static_cast<double>(budget))));
      for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j)
          for (std::size_t k = 0; k < g; ++k)
            pts.push_back({axis_max[0] * static_cast<double>(i) / static_cast<double>(g - 1),
                           axis_max[1] * static_cast<double>(j) / static_cast<double>(g - 1),
                           axis_max[2] * static_cast<double>(k) / static_cast<double>(g - 1)});
    } else {
      SplitRng rng(seed, fnv1a(entry.id));
      for (std::size_t i = 0; i < budget; ++i)
        pts.push_back({axis_max[0] * rng.next_double(),
                       axis_max[1] * rng.next_double(),
                       axis_max[2] * rng.next_double()});
    }

    for (const auto& p : pts) {
      const FeasibilityResult fr =
          feasible(sys, RatePoint{p[0], p[1], p[2], 0.0});
      out.samples.push_back({entry.id, p[0], p[1], p[2],
                             fr.status == FeasStatus::Feasible, fr.boundary});
    }
  }

  std::vector<std::array<double, 3>> feas;
  for (const auto& s : out.samples)
    if (s.feasible) {
      std::array<double, 3> p = {s.r1, s.r2, s.r3};
      if (std::find(feas.begin(), feas.end(), p) == feas.end()) feas.push_back(p);
    }
  for (std::size_t i = 0; i < feas.size(); ++i)
    if (detail::is_extreme(feas, i)) out.hull.push_back(feas[i]);
  return out;
}

// ---- serialization ------------------------------------------------------

inline nlohmann::json to_json(const InequalitySystem& sys) {
  nlohmann::json cons = nlohmann::json::array();
  for (const auto& c : sys.constraints) {
    nlohmann::json groups = nlohmann::json::object();
    for (const auto& [g, v] : c.groups)
      groups[sys.groups[static_cast<std::size_t>(g)].name] = v;
    cons.push_back({{"name", c.name},
                    {"lhs", c.lhs},
                    {"max_terms", groups},
                    {"sense", std::string(1, c.sense)},
                    {"rhs", c.rhs},
                    {"provenance", c.provenance}});
  }
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : sys.groups) groups.push_back(g.name);
  return {{"variables", sys.variables},
          {"groups", groups},
          {"constraints", cons},
          {"metadata", sys.metadata}};
}

inline std::string region_csv(const std::vector<RegionSample>& samples) {
  std::ostringstream os;
  os << "model_id,R1,R2,R3,feasible,boundary\n";
  os << std::setprecision(12);
  for (const auto& s : samples)
    os << s.model_id << "," << s.r1 << "," << s.r2 << "," << s.r3 << ","
       << (s.feasible ? 1 : 0) << "," << (s.boundary ? 1 : 0) << "\n";
  return os.str();
}

// collapse the named RVs of a model to singletons by marginalization;
// requires the fusion map not to depend on the collapsed coordinates
inline AuxiliaryModel trivialize(const AuxiliaryModel& m,
                                 const std::vector<std::string>& names) {
  AuxiliaryModel out = m;
  std::vector<bool> collapse(m.rvs.size(), false);
  for (const auto& n : names) {
    const int i = m.rv_index(n);
    if (i < 0) throw std::invalid_argument("model lacks RV " + n);
    collapse[static_cast<std::size_t>(i)] = true;
    out.rvs[static_cast<std::size_t>(i)].size = 1;
  }
  out.pmf.assign(out.joint_size(), 0.0);
  out.fusion.assign(out.joint_size(), -1);
  for (std::size_t flat = 0; flat < m.joint_size(); ++flat) {
    if (m.pmf[flat] < kPmfSupportCutoff) continue;
    auto t = m.tuple_of(flat);
    for (std::size_t i = 0; i < t.size(); ++i)
      if (collapse[i]) t[i] = 0;
    std::size_t nf = 0;
    for (std::size_t i = 0; i < t.size(); ++i)
      nf = nf * static_cast<std::size_t>(out.rvs[i].size) +
           static_cast<std::size_t>(t[i]);
    out.pmf[nf] += m.pmf[flat];
    if (out.fusion[nf] >= 0 && out.fusion[nf] != m.fusion[flat])
      throw std::invalid_argument(
          "fusion depends on a collapsed coordinate; cannot trivialize");
    out.fusion[nf] = m.fusion[flat];
  }
  return out;
}

}  // namespace cqbc
