#include <catch2/catch_amalgamated.hpp>

#include "cqbc/example1.hpp"

using namespace cqbc;

namespace {

// random step-II model over binary alphabets, independent-ish PMF
AuxiliaryModel random_stepII_model(SplitRng& rng) {
  AuxiliaryModel m;
  for (const auto& p : pair_names()) m.rvs.push_back({"U" + p, 2, true});
  m.rvs.push_back({"V1", 2, false});
  m.rvs.push_back({"V2", 2, false});
  m.rvs.push_back({"V3", 2, false});
  const std::size_t total = m.joint_size();
  m.pmf.assign(total, 0.0);
  m.fusion.assign(total, 0);
  double sum = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    m.pmf[flat] = rng.next_double() + 0.05;
    sum += m.pmf[flat];
    const auto t = m.tuple_of(flat);
    // fusion built from the V layer only so U-marginalization stays valid
    m.fusion[flat] = t[6] * 4 + t[7] * 2 + t[8];
  }
  for (auto& p : m.pmf) p /= sum;
  return m;
}

// replace the collapsed U layer by independent uniform binary pairs while
// keeping the V marginal; the structured system on this witness model must
// contain every baseline-feasible point
AuxiliaryModel uniform_u_lift(const AuxiliaryModel& reduced) {
  AuxiliaryModel out = reduced;
  for (auto& rv : out.rvs)
    if (rv.name[0] == 'U') rv.size = 2;
  const std::size_t total = out.joint_size();
  out.pmf.assign(total, 0.0);
  out.fusion.assign(total, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    auto t = out.tuple_of(flat);
    std::vector<int> vt = t;
    for (std::size_t i = 0; i < 6; ++i) vt[i] = 0;
    std::size_t vflat = 0;
    for (std::size_t i = 0; i < vt.size(); ++i)
      vflat = vflat * static_cast<std::size_t>(reduced.rvs[i].size) +
              static_cast<std::size_t>(vt[i]);
    out.pmf[flat] = reduced.pmf[vflat] / 64.0;
    out.fusion[flat] = reduced.fusion[vflat];
  }
  return out;
}

AuxiliaryModel lift_to_stepIII(const AuxiliaryModel& m) {
  AuxiliaryModel out;
  out.rvs.push_back({"W", 1, false});
  for (const auto& p : pair_names()) out.rvs.push_back({"Q" + p, 1, false});
  for (const auto& rv : m.rvs) out.rvs.push_back(rv);
  out.pmf = m.pmf;
  out.fusion = m.fusion;
  return out;
}

}  // namespace

TEST_CASE("thm1 system on the worked example, commutative case") {
  const double delta1 = 0.01, tau = 0.05, delta = 0.10;
  const CqBroadcastChannel ch = commutative_channel(delta1, delta);
  const AuxiliaryModel model = example1_model(tau);
  const InequalitySystem sys = thm1_system(model, ch);

  const double conv = binary_convolution(tau, delta1);
  const double c1 = binary_entropy(conv) - binary_entropy(delta1);
  const double c2 = 1.0 - binary_entropy(delta);

  SECTION("theta minimum over F_2 for independent uniform bits is 1") {
    REQUIRE(sys.metadata.at("min_theta_all").get<double>() ==
            Catch::Approx(1.0).margin(1e-9));
    REQUIRE(sys.metadata.at("min_theta_nonzero").get<double>() ==
            Catch::Approx(1.0).margin(1e-9));
  }

  SECTION("origin and the capacity triple are feasible") {
    REQUIRE(is_feasible(sys, RatePoint{0, 0, 0, tau}));
    const FeasibilityResult fr = feasible(sys, RatePoint{c1, c2, c2, tau});
    REQUIRE(fr.status == FeasStatus::Feasible);
    REQUIRE(fr.boundary);
  }

  SECTION("hand-checked infeasible points") {
    // decoder-2 chain caps R2 by log v + H(V2)
    REQUIRE_FALSE(is_feasible(sys, RatePoint{0, 2.001, 0, tau}));
    // beyond the joint decoder-1 bound: C1 + C2 + eps with both others at capacity
    REQUIRE_FALSE(is_feasible(sys, RatePoint{c1 + 0.2, c2, c2, tau}));
  }

  SECTION("max_rate matches the single-user bound at zero side rates") {
    const auto mr = max_rate(sys, "R1", {{"R2", 0.0}, {"R3", 0.0}});
    REQUIRE(mr.status == LpStatus::Optimal);
    REQUIRE(mr.value == Catch::Approx(c1).margin(1e-9));
    const auto mr2 = max_rate(sys, "R1", {{"R2", c2}, {"R3", c2}});
    REQUIRE(mr2.status == LpStatus::Optimal);
    REQUIRE(mr2.value >= c1 - 1e-9);
  }

  SECTION("fact-1 arithmetic at the acceptance parameters") {
    const double uc1 = 1.0 - binary_entropy(delta1);
    REQUIRE(uc1 < c1 + c2 + c2);
    REQUIRE(uc1 >= c1 + std::max(c2, c2));
  }
}

TEST_CASE("closure monotonicity on random models") {
  SplitRng rng(41, 0);
  const CqBroadcastChannel ch = commutative_channel(0.02, 0.12);
  int checked = 0;
  for (int rep = 0; rep < 50 && checked < 50; ++rep) {
    const double tau = 0.02 + 0.4 * rng.next_double();
    const InequalitySystem sys = thm1_system(example1_model(tau), ch);
    const auto mr = max_rate(sys, "R1", {{"R2", 0.05}, {"R3", 0.05}});
    if (mr.status != LpStatus::Optimal) continue;
    const RatePoint p{mr.value * 0.9, 0.05, 0.05, tau};
    if (!is_feasible(sys, p)) continue;
    // componentwise smaller points stay feasible
    const double f1 = rng.next_double(), f2 = rng.next_double(),
                 f3 = rng.next_double();
    REQUIRE(is_feasible(sys, RatePoint{p.r1 * f1, p.r2 * f2, p.r3 * f3, tau}));
    ++checked;
  }
  REQUIRE(checked > 20);
}

TEST_CASE("step II admissible source-bound combinatorics for binary fields") {
  // (A, B, C): B over subsets of receivers, A over pair subsets avoiding
  // the codes summed at B's receivers, C over receiver subsets:
  // sum_B 2^(6 - 2|B|) * 8 = 8 * (64 + 3*16 + 3*4 + 1) = 1000
  std::size_t count = 0;
  for (unsigned bm = 0; bm < 8; ++bm) {
    const int nb = __builtin_popcount(bm);
    count += (std::size_t{1} << (6 - 2 * nb)) * 8;
  }
  REQUIRE(count == 1000);

  SplitRng rng(43, 0);
  const CqBroadcastChannel ch = commutative_channel(0.01, 0.10);
  const InequalitySystem sys = stepII_system(random_stepII_model(rng), ch);
  std::size_t source_rows = 0;
  for (const auto& c : sys.constraints)
    if (c.name.rfind("src", 0) == 0) ++source_rows;
  // the all-empty triple is dropped as vacuous
  REQUIRE(source_rows == 1000 - 1);
}

TEST_CASE("step III with trivial W and Q matches step II exactly") {
  SplitRng rng(47, 0);
  const CqBroadcastChannel ch = commutative_channel(0.01, 0.10);
  for (int rep = 0; rep < 10; ++rep) {
    const AuxiliaryModel m2 = random_stepII_model(rng);
    const InequalitySystem a = stepII_system(m2, ch);
    const InequalitySystem b = stepIII_system(lift_to_stepIII(m2), ch);
    std::string why;
    INFO(why);
    REQUIRE(systems_match(a, b, 1e-9, &why));
  }
}

TEST_CASE("unstructured baseline points stay feasible in the full system") {
  SplitRng rng(53, 0);
  const CqBroadcastChannel ch = commutative_channel(0.01, 0.10);
  for (int rep = 0; rep < 10; ++rep) {
    const AuxiliaryModel full = random_stepII_model(rng);
    const AuxiliaryModel reduced = trivialize(
        full, {"U12", "U13", "U21", "U23", "U31", "U32"});
    const InequalitySystem base = stepII_system(reduced, ch);
    const InequalitySystem fullsys = stepII_system(uniform_u_lift(reduced), ch);

    // probe the baseline region along each axis and at a mixed point
    const std::array<std::string, 3> rn = {"R1", "R2", "R3"};
    std::array<double, 3> ax{};
    for (int d = 0; d < 3; ++d) {
      std::map<std::string, double> fixed;
      for (int o = 0; o < 3; ++o)
        if (o != d) fixed[rn[static_cast<std::size_t>(o)]] = 0.0;
      const auto mr = max_rate(base, rn[static_cast<std::size_t>(d)], fixed);
      ax[static_cast<std::size_t>(d)] =
          mr.status == LpStatus::Optimal ? mr.value : 0.0;
    }
    const std::vector<RatePoint> probes = {
        {ax[0], 0, 0, 1}, {0, ax[1], 0, 1}, {0, 0, ax[2], 1},
        {ax[0] / 2, ax[1] / 2, ax[2] / 2, 1}};
    for (const auto& p : probes) {
      if (!is_feasible(base, p)) continue;
      REQUIRE(is_feasible(fullsys, p));
    }
  }
}

TEST_CASE("region search basics") {
  const CqBroadcastChannel ch = commutative_channel(0.01, 0.10);
  std::vector<ModelEntry> family = {{"ex1", example1_model(0.05)}};
  const RegionResult res = search_region(ch, family, 27, 7, /*grid=*/true);
  REQUIRE(!res.samples.empty());
  REQUIRE(!res.hull.empty());
  bool origin_feasible = false;
  for (const auto& s : res.samples)
    if (s.r1 == 0 && s.r2 == 0 && s.r3 == 0 && s.feasible) origin_feasible = true;
  REQUIRE(origin_feasible);
  // determinism under seed
  const RegionResult res2 = search_region(ch, family, 27, 7, true);
  REQUIRE(res.samples.size() == res2.samples.size());
  for (std::size_t i = 0; i < res.samples.size(); ++i) {
    REQUIRE(res.samples[i].r1 == res2.samples[i].r1);
    REQUIRE(res.samples[i].feasible == res2.samples[i].feasible);
  }
}

TEST_CASE("system serialization carries provenance") {
  const CqBroadcastChannel ch = commutative_channel(0.01, 0.10);
  const nlohmann::json j = to_json(thm1_system(example1_model(0.05), ch));
  REQUIRE(j.contains("constraints"));
  bool found = false;
  for (const auto& c : j["constraints"])
    if (c["provenance"].get<std::string>().find("H(") != std::string::npos)
      found = true;
  REQUIRE(found);
}
