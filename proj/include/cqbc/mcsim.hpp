#pragma once

// Monte-Carlo validation of the commutative-case linear-coding strategy
// on the equivalent classical broadcast channel: Y1 = X1 + U2 + U3 + N1,
// Yj = Uj + Nj. Receivers 2 and 3 use cosets of a common binary linear
// code; receiver 1 jointly decodes its own cost-constrained codeword and
// the sum codeword by exhaustive minimum-distance search.

#include <bit>

#include "cqbc/gf.hpp"
#include "cqbc/quantum.hpp"
#include "cqbc/rng.hpp"

#include <json.hpp>

namespace cqbc {

// exhaustive joint decoding work bound: 2^(s+t) sum candidates times
// 2^k1 own candidates
inline constexpr std::size_t kSimSearchCap = std::size_t{1} << 26;
inline constexpr int kSimMaxBlock = 26;

struct SimConfig {
  int n = 12;
  double delta1 = 0.01;
  double delta = 0.10;
  double tau = 0.05;
  int k1 = 1;  // Rx1 codebook exponent (2^k1 codewords)
  int s = 0;   // inner (bin) dimension of the shared linear code
  int t = 1;   // outer (message) dimension of the shared linear code
  int trials = 2000;
  std::uint64_t seed = 1;
  // optional explicit Rx1 codebook size; 0 selects 2^k1. Lets the realized
  // rate log2(m1)/n track a fractional target that powers of two cannot.
  long m1 = 0;

  void validate_config() const {
    if (n < 1 || n > kSimMaxBlock)
      throw std::invalid_argument("block length must be in [1, 26]");
    if (delta1 < 0.0 || delta1 >= 0.5 || delta < 0.0 || delta >= 0.5)
      throw std::invalid_argument("crossover probabilities must lie in [0, 1/2)");
    if (tau < 0.0 || tau > 0.5)
      throw std::invalid_argument("cost budget must lie in [0, 1/2]");
    if (k1 < 0 || s < 0 || t < 0 || s + t > n || k1 > n)
      throw std::invalid_argument("code dimensions out of range");
    if (trials < 1) throw std::invalid_argument("need at least one trial");
    if (m1 < 0) throw std::invalid_argument("codebook size must be positive");
    if (codebook_size() * (std::size_t{1} << (s + t)) > kSimSearchCap)
      throw std::invalid_argument("parameters exceed the exhaustive-decoding cap");
  }

  std::size_t codebook_size() const {
    return m1 > 0 ? static_cast<std::size_t>(m1) : std::size_t{1} << k1;
  }

  double rate1() const {
    return std::log2(static_cast<double>(codebook_size())) / n;
  }
  double rate_shared() const { return static_cast<double>(t) / n; }
};

struct ReceiverStat {
  long errors = 0;
  double rate = 0.0;   // empirical block-error rate
  double ci_lo = 0.0;  // Wilson 95%
  double ci_hi = 0.0;
};

struct SimResult {
  SimConfig config;
  std::array<ReceiverStat, 3> rx;
  double mean_weight1 = 0.0;  // empirical mean Hamming weight of x1 per symbol
};

// Wilson score interval for a binomial proportion at 95%
inline std::pair<double, double> wilson_interval(long errors, long trials) {
  const double z = 1.959963984540054;
  const double nn = static_cast<double>(trials);
  const double p = static_cast<double>(errors) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// Randomized codeword selection within a bin, weighted by the ratio r of
// the target PMF to the generation PMF; product PMFs give r identically
// one, i.e. uniform selection.
inline std::size_t likelihood_encoder_degenerate(const std::vector<double>& r,
                                                 SplitRng& rng) {
  double total = 0.0;
  for (double w : r) {
    if (w < 0.0) throw std::invalid_argument("negative selection weight");
    total += w;
  }
  if (r.empty() || total <= 0.0) throw std::invalid_argument("empty bin");
  double u = rng.next_double() * total;
  for (std::size_t i = 0; i < r.size(); ++i) {
    u -= r[i];
    if (u < 0.0) return i;
  }
  return r.size() - 1;
}

namespace detail {

// all words of the span of `rows` plus bias, bit packed; index bit i of
// the rank selects row i (lowest index = last row for Gray-free fill)
inline std::vector<std::uint32_t> span_words(const std::vector<std::uint32_t>& rows,
                                             std::uint32_t bias) {
  std::vector<std::uint32_t> out(std::size_t{1} << rows.size());
  out[0] = bias;
  for (std::size_t i = 1; i < out.size(); ++i) {
    const unsigned low = static_cast<unsigned>(std::countr_zero(i));
    out[i] = out[i & (i - 1)] ^ rows[low];
  }
  return out;
}

inline std::uint32_t random_word(SplitRng& rng, int n) {
  return static_cast<std::uint32_t>(rng.next_u64() &
                                    ((std::uint64_t{1} << n) - 1));
}

inline std::uint32_t bernoulli_word(SplitRng& rng, int n, double p) {
  std::uint32_t w = 0;
  for (int i = 0; i < n; ++i)
    if (rng.next_bernoulli(p)) w |= std::uint32_t{1} << i;
  return w;
}

}  // namespace detail

inline SimResult run(const SimConfig& cfg) {
  cfg.validate_config();
  const int r = cfg.s + cfg.t;
  const std::size_t ncand = std::size_t{1} << r;
  const std::size_t nown = cfg.codebook_size();

  SimResult res;
  res.config = cfg;
  long weight_sum = 0;

  for (int trial = 0; trial < cfg.trials; ++trial) {
    SplitRng rng(cfg.seed, static_cast<std::uint64_t>(trial));

    // shared linear code: s inner rows then t outer rows; lambda2 and
    // lambda3 are cosets of the same code with independent biases
    std::vector<std::uint32_t> rows(static_cast<std::size_t>(r));
    for (auto& row : rows) row = detail::random_word(rng, cfg.n);
    const std::uint32_t b2 = detail::random_word(rng, cfg.n);
    const std::uint32_t b3 = detail::random_word(rng, cfg.n);

    // Rx1 codebook: IID Ber(tau) entries (cost-constrained ensemble)
    std::vector<std::uint32_t> book1(nown);
    for (auto& w : book1) w = detail::bernoulli_word(rng, cfg.n, cfg.tau);

    // messages and bin members; bin selection is uniform (degenerate
    // likelihood encoder for a product PMF)
    const std::size_t m1 = static_cast<std::size_t>(rng.next_below(nown));
    const std::size_t m2 = static_cast<std::size_t>(rng.next_below(std::uint64_t{1} << cfg.t));
    const std::size_t m3 = static_cast<std::size_t>(rng.next_below(std::uint64_t{1} << cfg.t));
    const std::size_t a2 = static_cast<std::size_t>(rng.next_below(std::uint64_t{1} << cfg.s));
    const std::size_t a3 = static_cast<std::size_t>(rng.next_below(std::uint64_t{1} << cfg.s));

    auto encode = [&](std::size_t a, std::size_t m, std::uint32_t bias) {
      std::uint32_t w = bias;
      for (int i = 0; i < cfg.s; ++i)
        if (a & (std::size_t{1} << i)) w ^= rows[static_cast<std::size_t>(i)];
      for (int i = 0; i < cfg.t; ++i)
        if (m & (std::size_t{1} << i)) w ^= rows[static_cast<std::size_t>(cfg.s + i)];
      return w;
    };
    const std::uint32_t u2 = encode(a2, m2, b2);
    const std::uint32_t u3 = encode(a3, m3, b3);
    const std::uint32_t x1 = book1[m1];

    // sum-coset closure: u2 + u3 must be the sum-coset word of
    // (a2+a3, m2+m3)
    if ((u2 ^ u3) != encode(a2 ^ a3, m2 ^ m3, b2 ^ b3))
      throw std::logic_error("sum-coset closure violated in simulation");

    weight_sum += std::popcount(x1);

    const std::uint32_t y1 = x1 ^ u2 ^ u3 ^ detail::bernoulli_word(rng, cfg.n, cfg.delta1);
    const std::uint32_t y2 = u2 ^ detail::bernoulli_word(rng, cfg.n, cfg.delta);
    const std::uint32_t y3 = u3 ^ detail::bernoulli_word(rng, cfg.n, cfg.delta);

    // Rx2 / Rx3: exhaustive minimum distance over the own coset; ML
    // equals minimum distance for delta < 1/2; ties to lowest index
    const std::vector<std::uint32_t> words2 = detail::span_words(rows, b2);
    const std::vector<std::uint32_t> words3 = detail::span_words(rows, b3);
    auto decode_private = [&](const std::vector<std::uint32_t>& words,
                              std::uint32_t y) {
      std::size_t best = 0;
      int best_d = cfg.n + 1;
      for (std::size_t c = 0; c < words.size(); ++c) {
        const int dist = std::popcount(y ^ words[c]);
        if (dist < best_d) {
          best_d = dist;
          best = c;
        }
      }
      return best;
    };
    // candidate rank layout in span_words: bit i of the rank toggles
    // row i, so the message part is rank >> s
    const std::size_t d2 = decode_private(words2, y2) >> cfg.s;
    const std::size_t d3 = decode_private(words3, y3) >> cfg.s;

    // Rx1: joint exhaustive search over (own candidate, sum candidate)
    const std::vector<std::uint32_t> wsum = detail::span_words(rows, b2 ^ b3);
    std::size_t best1 = 0;
    int best_d = cfg.n + 1;
    for (std::size_t v = 0; v < nown; ++v) {
      const std::uint32_t z = y1 ^ book1[v];
      for (std::size_t c = 0; c < ncand; ++c) {
        const int dist = std::popcount(z ^ wsum[c]);
        if (dist < best_d) {
          best_d = dist;
          best1 = v;
        }
      }
    }

    if (best1 != m1) ++res.rx[0].errors;
    if (d2 != m2) ++res.rx[1].errors;
    if (d3 != m3) ++res.rx[2].errors;
  }

  for (auto& stat : res.rx) {
    stat.rate = static_cast<double>(stat.errors) / cfg.trials;
    std::tie(stat.ci_lo, stat.ci_hi) = wilson_interval(stat.errors, cfg.trials);
  }
  res.mean_weight1 = static_cast<double>(weight_sum) /
                     (static_cast<double>(cfg.trials) * cfg.n);
  return res;
}

inline std::string sim_csv_header() {
  return "n,R1,R2,R3,err1,ci1_lo,ci1_hi,err2,ci2_lo,ci2_hi,err3,ci3_lo,ci3_hi,seed";
}

inline std::string sim_csv_row(const SimResult& r) {
  std::ostringstream os;
  os.precision(12);
  os << r.config.n << "," << r.config.rate1() << "," << r.config.rate_shared()
     << "," << r.config.rate_shared();
  for (const auto& s : r.rx)
    os << "," << s.rate << "," << s.ci_lo << "," << s.ci_hi;
  os << "," << r.config.seed;
  return os.str();
}

inline nlohmann::json to_json(const SimResult& r) {
  nlohmann::json rx = nlohmann::json::array();
  for (const auto& s : r.rx)
    rx.push_back({{"errors", s.errors},
                  {"rate", s.rate},
                  {"ci_lo", s.ci_lo},
                  {"ci_hi", s.ci_hi}});
  return {{"n", r.config.n},
          {"R1", r.config.rate1()},
          {"R_shared", r.config.rate_shared()},
          {"trials", r.config.trials},
          {"seed", r.config.seed},
          {"receivers", rx},
          {"mean_weight1", r.mean_weight1}};
}

}  // namespace cqbc
