#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>

#include "lcs/fbc.hpp"
#include "lcs/latmod.hpp"
#include "lcs/liemod.hpp"
#include "lcs/magnus.hpp"
#include "testutil.hpp"

using namespace lcs;

namespace {

using NaiveSeries = std::map<std::vector<int>, Int>;

// Letter-by-letter reference expansion over flat letters: generator g maps to
// 1 + X_g, an inverse letter to the truncated alternating series. Independent
// of the dense-block implementation.
NaiveSeries naiveExpand(const Word& w, int cap) {
  NaiveSeries acc{{{}, 1}};
  auto mulFactor = [&](int gen, int sign) {
    NaiveSeries next;
    for (const auto& [mono, coeff] : acc) {
      for (int k = 0; static_cast<int>(mono.size()) + k <= cap; ++k) {
        Int factorCoeff = k == 0 ? 1 : (sign > 0 ? (k == 1 ? 1 : 0) : ((k % 2 == 0) ? 1 : -1));
        if (sgn(factorCoeff) == 0) continue;
        std::vector<int> m = mono;
        for (int i = 0; i < k; ++i) m.push_back(gen);
        next[m] += coeff * factorCoeff;
      }
    }
    for (auto it = next.begin(); it != next.end();)
      it = sgn(it->second) == 0 ? next.erase(it) : std::next(it);
    return next;
  };
  for (const Run& r : w.runs()) {
    long e = toLong(r.exp);
    for (long i = 0; i < (e > 0 ? e : -e); ++i) acc = mulFactor(r.gen, e > 0 ? 1 : -1);
  }
  return acc;
}

NaiveSeries toNaive(const TruncSeries& s) {
  NaiveSeries out;
  if (sgn(s.constant()) != 0) out[{}] = s.constant();
  for (int d = 1; d <= s.cap(); ++d)
    for (long i = 0; i < s.block(d).size(); ++i)
      if (sgn(s.block(d)(i)) != 0) out[monomialLetters(i, d, s.rank())] = s.block(d)(i);
  return out;
}

Word xw() { return Word::generator(0); }
Word yw() { return Word::generator(1); }

}  // namespace

TEST_CASE("generator expansions", "[magnus]") {
  TruncSeries s = expand(xw(), 2, 3);
  CHECK(s.constant() == 1);
  CHECK(s.block(1)(0) == 1);
  CHECK(s.block(1)(1) == 0);
  CHECK(s.block(2) == IntVec::Zero(4));

  // x^3 = 1 + 3X + 3X^2 + X^3
  TruncSeries cube = expand(pow(xw(), 3), 2, 3);
  CHECK(cube.block(1)(0) == 3);
  CHECK(cube.block(2)(0) == 3);
  CHECK(cube.block(3)(0) == 1);

  // huge single-run exponents go through the generalized binomial
  Int huge = intPow(Int(3), 40);
  TruncSeries big = expand(pow(xw(), huge), 2, 2);
  CHECK(big.block(1)(0) == huge);
  CHECK(big.block(2)(0) == huge * (huge - 1) / 2);
}

TEST_CASE("commutator expansion has the bracket leading term", "[magnus]") {
  TruncSeries s = expand(commutator(xw(), yw()), 2, 2);
  CHECK(s.constant() == 1);
  CHECK(s.block(1) == IntVec::Zero(2));
  // degree-2 block indexed xx, xy, yx, yy
  CHECK(s.block(2)(0) == 0);
  CHECK(s.block(2)(1) == 1);
  CHECK(s.block(2)(2) == -1);
  CHECK(s.block(2)(3) == 0);
}

TEST_CASE("expansion agrees with the naive oracle and is multiplicative", "[magnus][props]") {
  std::mt19937_64 rng(23);
  for (int cap = 1; cap <= 6; ++cap) {
    for (int i = 0; i < 60; ++i) {
      Word u = testutil::randomWord(rng, 2, 12);
      Word v = testutil::randomWord(rng, 2, 12);
      TruncSeries eu = expand(u, 2, cap), ev = expand(v, 2, cap);
      CHECK(toNaive(eu) == naiveExpand(u, cap));
      CHECK(mul(eu, ev) == expand(product(u, v), 2, cap));
    }
  }
}

TEST_CASE("inversion is exact", "[magnus]") {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 200; ++i) {
    Word w = testutil::randomWord(rng, 2, 25);
    TruncSeries s = expand(w, 2, 5);
    TruncSeries prod = mul(s, expand(inverse(w), 2, 5));
    CHECK(prod.isOne());
    CHECK(mul(s, inverseUnit(s)).isOne());
  }
}

TEST_CASE("series powers match word powers", "[magnus]") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) {
    Word w = testutil::randomWord(rng, 2, 8);
    std::uniform_int_distribution<long> expDist(-6, 6);
    long e = expDist(rng);
    CHECK(seriesPow(expand(w, 2, 4), Int(e)) == expand(pow(w, Int(e)), 2, 4));
  }
  // exponents far beyond anything a flat word could reach
  Int huge = intPow(Int(3), 33);
  CHECK(seriesPow(expand(xw(), 2, 3), huge) == expand(pow(xw(), huge), 2, 3));
}

TEST_CASE("storage is dense by degree", "[magnus]") {
  TruncSeries s(2, 7);
  long total = 0;
  for (int d = 1; d <= 7; ++d) {
    CHECK(s.block(d).size() == (1L << d));
    total += s.block(d).size();
  }
  CHECK(total == 254);
  CHECK(s.positionCount() == 254);
}

TEST_CASE("weights", "[magnus]") {
  WeightResult w = weight(commutator(xw(), yw()), 2, 6);
  CHECK(w.exact);
  CHECK(w.bound == 2);

  // identity has no nonzero coefficient at any cap
  WeightResult idw = weight(Word(), 2, 6);
  CHECK_FALSE(idw.exact);
  CHECK(idw.bound == 7);

  // left-normed chains [[y,x],x,[y,x],...,[y,x]] with k copies: weight 2k+3
  Word yx = commutator(yw(), xw());
  for (int k = 0; k <= 4; ++k) {
    std::vector<Word> items{yx, xw()};
    for (int i = 0; i < k; ++i) items.push_back(yx);
    WeightResult wr = weight(leftNormed(std::span<const Word>(items.data(), items.size())), 2, 12);
    CHECK(wr.exact);
    CHECK(wr.bound == 2 * k + 3);
  }
}

TEST_CASE("gamma membership in the free group", "[magnus]") {
  Word c = commutator(xw(), yw());
  CHECK(isInGamma(c, 2, 2, 6));
  CHECK_FALSE(isInGamma(c, 3, 2, 6));
  CHECK_FALSE(isInGamma(pow(xw(), 3), 2, 2, 6));
  CHECK(isInGamma(Word(), 7, 2, 6));
  CHECK_THROWS_AS(isInGamma(c, 8, 2, 6), precision_error);
}

TEST_CASE("commutator weight adds up", "[magnus][props]") {
  std::mt19937_64 rng(37);
  int informative = 0;
  for (int i = 0; i < 200; ++i) {
    Word u = testutil::randomWord(rng, 2, 10);
    Word v = testutil::randomWord(rng, 2, 10);
    WeightResult wu = weight(u, 2, 6), wv = weight(v, 2, 6);
    if (!wu.exact || !wv.exact) continue;
    WeightResult wc = weight(commutator(u, v), 2, 6);
    CHECK(wc.bound >= std::min(wu.bound + wv.bound, 7));
    ++informative;
  }
  CHECK(informative > 100);
}

TEST_CASE("substitution is functorial", "[magnus]") {
  Alphabet fib = Alphabet::fiber(2);
  std::vector<Word> phi = {parseWord("y", fib), parseWord("x*y^3", fib)};
  std::vector<Word> phiInv = {parseWord("y*x^-3", fib), parseWord("x", fib)};

  CHECK(substitute(expand(xw(), 2, 4), phi) == expand(yw(), 2, 4));
  CHECK(substitute(expand(commutator(xw(), yw()), 2, 4), phi) ==
        expand(commutator(parseWord("y", fib), parseWord("x*y^3", fib)), 2, 4));

  std::mt19937_64 rng(41);
  for (int i = 0; i < 100; ++i) {
    Word w = testutil::randomWord(rng, 2, 8);
    TruncSeries s = expand(w, 2, 4);
    CHECK(substitute(s, phi) == expand(FreeAutomorphism::applyWords(phi, w), 2, 4));
    CHECK(substitute(substitute(s, phi), phiInv) == s);
  }
}

TEST_CASE("degree-n coefficients of bracket words span the Lie component", "[magnus]") {
  for (int n = 2; n <= 5; ++n) {
    const auto& basis = hallBasis(2, n);
    IntMat stacked(static_cast<Eigen::Index>(basis.size()), 1L << n);
    for (size_t i = 0; i < basis.size(); ++i) {
      TruncSeries s = expand(hallBracketWord(basis[i].tree), 2, n);
      for (long j = 0; j < s.block(n).size(); ++j) stacked(static_cast<Eigen::Index>(i), j) = s.block(n)(j);
    }
    CHECK(rankOf(stacked) == wittDimension(2, n));
  }
}

TEST_CASE("products only perturb at or after the smaller leading position", "[magnus][props]") {
  // the property that makes integer echelon sifting sound for group elements
  std::mt19937_64 rng(83);
  for (int i = 0; i < 400; ++i) {
    Word u = testutil::randomWord(rng, 2, 15);
    Word v = testutil::randomWord(rng, 2, 15);
    TruncSeries a = expand(u, 2, 5), b = expand(v, 2, 5);
    long pa = a.firstNonzeroPosition(), pb = b.firstNonzeroPosition();
    if (pa < 0 && pb < 0) continue;
    long lead = pa < 0 ? pb : (pb < 0 ? pa : std::min(pa, pb));
    TruncSeries prod = mul(a, b);
    long pp = prod.firstNonzeroPosition();
    CHECK((pp < 0 || pp >= lead));
    // and the coefficient at the smaller position simply adds
    const Int ca = pa == lead ? a.coeffAtPosition(lead) : Int(0);
    const Int cb = pb == lead ? b.coeffAtPosition(lead) : Int(0);
    if (sgn(ca + cb) != 0) CHECK(prod.coeffAtPosition(lead) == ca + cb);
  }
}

TEST_CASE("series print deterministically", "[magnus]") {
  Alphabet fib = Alphabet::fiber(2);
  TruncSeries s = expand(commutator(xw(), yw()), 2, 2);
  CHECK(toString(s, fib) == "1 + 1.x.y - 1.y.x");
}
