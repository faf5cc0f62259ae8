#include <catch2/catch_amalgamated.hpp>

#include "cqbc/mcsim.hpp"

using namespace cqbc;

TEST_CASE("config validation") {
  SimConfig ok{12, 0.01, 0.10, 0.05, 2, 2, 4, 50, 1};
  REQUIRE_NOTHROW(ok.validate_config());

  SimConfig bad = ok;
  bad.s = 10;
  bad.t = 10;  // s + t > n
  REQUIRE_THROWS(bad.validate_config());

  bad = ok;
  bad.n = 30;  // above the block cap
  REQUIRE_THROWS(bad.validate_config());

  bad = ok;
  bad.delta = 0.6;  // crossover beyond 1/2 breaks min-distance = ML
  REQUIRE_THROWS(bad.validate_config());

  bad = ok;
  bad.n = 26;
  bad.k1 = 14;
  bad.s = 0;
  bad.t = 13;  // joint search 2^27 over the candidate cap
  REQUIRE_THROWS(bad.validate_config());
}

TEST_CASE("wilson interval sanity") {
  const auto [lo, hi] = wilson_interval(0, 100);
  REQUIRE(lo == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(hi > 0.0);
  REQUIRE(hi < 0.05);
  const auto [lo2, hi2] = wilson_interval(50, 100);
  REQUIRE(lo2 < 0.5);
  REQUIRE(hi2 > 0.5);
  REQUIRE(hi2 - lo2 < 0.25);
  const auto [lo3, hi3] = wilson_interval(100, 100);
  REQUIRE(hi3 == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("degenerate likelihood encoder") {
  SplitRng rng(17, 0);

  SECTION("single positive weight is deterministic") {
    for (int rep = 0; rep < 10; ++rep)
      REQUIRE(likelihood_encoder_degenerate({0.0, 0.7, 0.0}, rng) == 1);
  }

  SECTION("empty or all-zero weights throw") {
    REQUIRE_THROWS(likelihood_encoder_degenerate({}, rng));
    REQUIRE_THROWS(likelihood_encoder_degenerate({0.0, 0.0}, rng));
  }

  SECTION("frequencies follow the weights") {
    const std::vector<double> w = {1.0, 3.0};
    std::size_t ones = 0;
    const std::size_t trials = 100000;
    for (std::size_t i = 0; i < trials; ++i)
      if (likelihood_encoder_degenerate(w, rng) == 1) ++ones;
    const double phat = static_cast<double>(ones) / static_cast<double>(trials);
    // 3 sigma around 0.75 with n = 1e5
    REQUIRE(std::abs(phat - 0.75) < 3.0 * std::sqrt(0.75 * 0.25 / trials));
  }
}

TEST_CASE("noiseless channel decodes perfectly") {
  // k1 = 0: receiver 1 has a single codeword, so with zero channel noise
  // every receiver must decode exactly (tau = 0 collapses the cost-
  // constrained codebook to the all-zero word)
  SimConfig cfg{12, 0.0, 0.0, 0.0, 0, 2, 3, 60, 5};
  const SimResult res = run(cfg);
  for (const auto& rx : res.rx) {
    REQUIRE(rx.errors == 0);
    REQUIRE(rx.rate == 0.0);
  }
  // tau = 0 forces the all-zero input at transmitter 1
  REQUIRE(res.mean_weight1 == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("runs are reproducible under a fixed seed") {
  SimConfig cfg{12, 0.02, 0.12, 0.05, 2, 2, 4, 120, 9};
  const SimResult a = run(cfg);
  const SimResult b = run(cfg);
  for (int j = 0; j < 3; ++j) {
    REQUIRE(a.rx[static_cast<std::size_t>(j)].errors ==
            b.rx[static_cast<std::size_t>(j)].errors);
    REQUIRE(a.rx[static_cast<std::size_t>(j)].rate ==
            b.rx[static_cast<std::size_t>(j)].rate);
  }
  REQUIRE(a.mean_weight1 == b.mean_weight1);
  REQUIRE(sim_csv_row(a) == sim_csv_row(b));

  SimConfig other = cfg;
  other.seed = 10;
  const SimResult c = run(other);
  const bool differs = c.rx[0].errors != a.rx[0].errors ||
                       c.rx[1].errors != a.rx[1].errors ||
                       c.rx[2].errors != a.rx[2].errors ||
                       c.mean_weight1 != a.mean_weight1;
  REQUIRE(differs);
}

TEST_CASE("transmitter-1 input weight concentrates around tau") {
  SimConfig cfg{16, 0.01, 0.10, 0.20, 2, 2, 4, 400, 3};
  const SimResult res = run(cfg);
  // mean fraction of ones over 400 * 16 biased coin flips, 4 sigma slack
  const double sd = std::sqrt(0.2 * 0.8 / (400.0 * 16.0));
  REQUIRE(std::abs(res.mean_weight1 - 0.2) < 4.0 * sd + 0.05);
}

TEST_CASE("heavier noise does not help any receiver") {
  SimConfig quiet{14, 0.01, 0.02, 0.05, 2, 2, 4, 300, 21};
  SimConfig loud = quiet;
  loud.delta1 = 0.30;
  loud.delta = 0.45;
  const SimResult a = run(quiet);
  const SimResult b = run(loud);
  for (int j = 0; j < 3; ++j)
    REQUIRE(b.rx[static_cast<std::size_t>(j)].rate + 0.10 >=
            a.rx[static_cast<std::size_t>(j)].rate);
}

TEST_CASE("csv layout") {
  REQUIRE(sim_csv_header() ==
          "n,R1,R2,R3,err1,ci1_lo,ci1_hi,err2,ci2_lo,ci2_hi,err3,ci3_lo,ci3_hi,"
          "seed");
  SimConfig cfg{12, 0.0, 0.0, 0.0, 1, 1, 2, 10, 2};
  const std::string row = sim_csv_row(run(cfg));
  REQUIRE(std::count(row.begin(), row.end(), ',') == 13);
}
