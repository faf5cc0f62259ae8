#include <map>
#include <set>

#include <catch2/catch_amalgamated.hpp>

#include "cqbc/gf.hpp"
#include "cqbc/rng.hpp"

using namespace cqbc;

namespace {

FieldVec unrank(std::size_t r, std::size_t len, int ups) {
  FieldVec v(len);
  for (std::size_t i = len; i-- > 0;) {
    v[i] = static_cast<int>(r % static_cast<std::size_t>(ups));
    r /= static_cast<std::size_t>(ups);
  }
  return v;
}

std::size_t pow_sz(int base, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= static_cast<std::size_t>(base);
  return r;
}

NestedCosetCode random_ncc(SplitRng& rng, int ups, std::size_t n, std::size_t k,
                           std::size_t l) {
  NestedCosetCode c;
  c.upsilon = ups;
  c.n = n;
  c.k = k;
  c.l = l;
  auto rand_row = [&] {
    FieldVec row(n);
    for (auto& x : row) x = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(ups)));
    return row;
  };
  for (std::size_t i = 0; i < k; ++i) c.g_inner.push_back(rand_row());
  for (std::size_t i = 0; i < l; ++i) c.g_outer.push_back(rand_row());
  c.b = rand_row();
  return c;
}

}  // namespace

TEST_CASE("prime field construction and arithmetic") {
  for (int p : {2, 3, 5, 7, 11}) REQUIRE_NOTHROW(PrimeField(p));
  for (int p : {0, 1, 4, 6, 9, 15}) REQUIRE_THROWS(PrimeField(p));
  PrimeField f(7);
  for (int a = 1; a < 7; ++a) REQUIRE(f.mul(a, f.inv(a)) == 1);
  REQUIRE(f.sub(2, 5) == 4);
  REQUIRE(f.neg(0) == 0);
}

TEST_CASE("coset codewords") {
  CosetCode id2{2, 2, 2, {{1, 0}, {0, 1}}, {0, 0}};
  REQUIRE(coset_codeword(id2, {1, 0}) == FieldVec{1, 0});
  CosetCode biased{2, 2, 2, {{1, 0}, {0, 1}}, {1, 1}};
  REQUIRE(coset_codeword(biased, {1, 0}) == FieldVec{0, 1});
  CosetCode f3{3, 2, 2, {{1, 2}, {2, 1}}, {1, 0}};
  REQUIRE(coset_codeword(f3, {1, 1}) == FieldVec{1, 0});
  REQUIRE_THROWS(coset_codeword(id2, {1}));
  REQUIRE_THROWS(coset_codeword(id2, {2, 0}));
}

TEST_CASE("nested coset codewords") {
  NestedCosetCode c{2, 3, 1, 1, {{1, 1, 0}}, {{0, 1, 1}}, {1, 0, 0}};
  REQUIRE(ncc_codeword(c, {0}, {0}) == FieldVec{1, 0, 0});
  REQUIRE(ncc_codeword(c, {1}, {1}) == FieldVec{0, 0, 1});
  NestedCosetCode zero{2, 3, 1, 1, {{1, 1, 0}}, {{0, 1, 1}}, {0, 0, 0}};
  REQUIRE(ncc_codeword(zero, {0}, {0}) == FieldVec{0, 0, 0});
  REQUIRE(ncc_codeword(zero, {0}, {1}) == FieldVec{0, 1, 1});
}

TEST_CASE("subcoset detection") {
  NestedCosetCode large{2, 3, 1, 1, {{1, 1, 0}}, {{0, 1, 1}}, {0, 0, 0}};
  REQUIRE(is_subcoset(large, large));
  NestedCosetCode small{2, 3, 1, 0, {{1, 1, 0}}, {}, {0, 0, 0}};
  REQUIRE(is_subcoset(small, large));
  NestedCosetCode outside{2, 3, 1, 0, {{1, 0, 0}}, {}, {0, 0, 0}};
  REQUIRE_FALSE(is_subcoset(outside, large));

  // exhaustive cross-check of the claim at n=3
  PrimeField f(2);
  std::set<FieldVec> large_words;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t m = 0; m < 2; ++m)
      large_words.insert(ncc_codeword(large, unrank(a, 1, 2), unrank(m, 1, 2)));
  bool all_in = true;
  for (std::size_t a = 0; a < 2; ++a)
    if (!large_words.count(ncc_codeword(outside, unrank(a, 1, 2), {})))
      all_in = false;
  REQUIRE_FALSE(all_in);
}

TEST_CASE("sum coset closure, exhaustive over small parameters") {
  SplitRng rng(7, 0);
  for (int ups : {2, 3}) {
    for (int rep = 0; rep < 8; ++rep) {
      const std::size_t n = 4 + rep % 5;  // up to 8
      NestedCosetCode c3 = random_ncc(rng, ups, n, 1, 2);
      // c2 shares a generator prefix with c3 (sub-coset by construction)
      NestedCosetCode c2 = c3;
      c2.l = 1;
      c2.g_outer.resize(1);
      c2.b = FieldVec(n);
      for (auto& x : c2.b)
        x = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(ups)));
      REQUIRE(is_subcoset(c2, NestedCosetCode{c3.upsilon, c3.n, c3.k, c3.l,
                                              c3.g_inner, c3.g_outer, c2.b}));

      for (std::size_t m2 = 0; m2 < pow_sz(ups, c2.l); ++m2)
        for (std::size_t m3 = 0; m3 < pow_sz(ups, c3.l); ++m3) {
          const FieldVec mv2 = unrank(m2, c2.l, ups);
          const FieldVec mv3 = unrank(m3, c3.l, ups);
          const auto [sum_code, msum] = sum_coset(c2, c3, mv2, mv3);
          for (std::size_t a2 = 0; a2 < pow_sz(ups, c2.k); ++a2)
            for (std::size_t a3 = 0; a3 < pow_sz(ups, c3.k); ++a3) {
              PrimeField f(ups);
              const FieldVec u = vec_add(
                  f, ncc_codeword(c2, unrank(a2, c2.k, ups), mv2),
                  ncc_codeword(c3, unrank(a3, c3.k, ups), mv3));
              REQUIRE(in_coset(sum_code, msum, u));
            }
        }
    }
  }
}

TEST_CASE("sum coset message arithmetic") {
  NestedCosetCode c{3, 2, 0, 2, {}, {{1, 0}, {0, 1}}, {0, 0}};
  const auto [code, msum] = sum_coset(c, c, {1, 2}, {2, 2});
  REQUIRE(msum == FieldVec{0, 1});
}

TEST_CASE("coset disjointness and cardinality") {
  SplitRng rng(11, 0);
  for (int rep = 0; rep < 6; ++rep) {
    const std::size_t n = 5;
    NestedCosetCode c = random_ncc(rng, 2, n, 2, 2);
    PrimeField f(2);
    const int rk_inner = field_rank(f, c.g_inner);
    const int rk_all = field_rank(f, c.stacked());

    std::map<std::size_t, std::set<FieldVec>> words;
    for (std::size_t m = 0; m < pow_sz(2, c.l); ++m)
      for (std::size_t a = 0; a < pow_sz(2, c.k); ++a)
        words[m].insert(ncc_codeword(c, unrank(a, c.k, 2), unrank(m, c.l, 2)));

    for (const auto& [m, set] : words)
      REQUIRE(set.size() == pow_sz(2, static_cast<std::size_t>(rk_inner)));
    if (rk_all == static_cast<int>(c.k + c.l)) {
      // independent outer rows: cosets of distinct messages are disjoint
      for (const auto& [m, set] : words)
        for (const auto& [m2, set2] : words) {
          if (m == m2) continue;
          for (const auto& w : set) REQUIRE_FALSE(set2.count(w));
        }
    }
  }
}

TEST_CASE("json round trip") {
  NestedCosetCode c{2, 3, 1, 1, {{1, 1, 0}}, {{0, 1, 1}}, {1, 0, 0}};
  const NestedCosetCode back = ncc_from_json(to_json(c));
  REQUIRE(back.g_inner == c.g_inner);
  REQUIRE(back.g_outer == c.g_outer);
  REQUIRE(back.b == c.b);
  REQUIRE(back.upsilon == c.upsilon);
}
