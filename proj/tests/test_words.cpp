#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <random>

#include "lcs/words.hpp"
#include "testutil.hpp"

using namespace lcs;

namespace {

Word xw() { return Word::generator(0); }
Word yw() { return Word::generator(1); }

// Flat signed-letter expansion, for brute-force cross-checks.
std::vector<int> flatten(const Word& w) {
  std::vector<int> out;
  for (const Run& r : w.runs()) {
    long e = toLong(r.exp);
    int letter = 2 * r.gen + (e > 0 ? 0 : 1);
    for (long i = 0; i < (e > 0 ? e : -e); ++i) out.push_back(letter);
  }
  return out;
}

}  // namespace

TEST_CASE("free reduction", "[words]") {
  CHECK(reduce({{0, 1}, {0, -1}, {1, 1}}, 2) == yw());
  CHECK(reduce({}, 2).isIdentity());
  CHECK(reduce({{0, 2}, {0, 3}}, 2) == Word::generator(0, 5));
  CHECK_THROWS_AS(reduce({{2, 1}}, 2), std::invalid_argument);

  // idempotence on random raw sequences
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    Word w = testutil::randomWord(rng, 2, 40);
    CHECK(Word(w.runs()) == w);
  }
}

TEST_CASE("inverse law on random words", "[words]") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    Word w = testutil::randomWord(rng, 2, 100);
    CHECK(product(w, inverse(w)).isIdentity());
    CHECK(product(inverse(w), w).isIdentity());
  }
}

TEST_CASE("commutators and conjugates", "[words]") {
  CHECK(commutator(xw(), xw()).isIdentity());

  Word c = commutator(xw(), yw());
  CHECK(c.flatLength() == 4);
  CHECK(c == parseWord("x^-1*y^-1*x*y", Alphabet::fiber(2)));

  std::mt19937_64 rng(13);
  for (int i = 0; i < 300; ++i) {
    Word u = testutil::randomWord(rng, 2, 20);
    Word v = testutil::randomWord(rng, 2, 20);
    CHECK(inverse(commutator(u, v)) == commutator(v, u));
  }

  CHECK(conjugate(xw(), yw()) == parseWord("y^-1*x*y", Alphabet::fiber(2)));
}

TEST_CASE("left-normed commutator", "[words]") {
  CHECK_THROWS_AS(leftNormed({xw()}), std::invalid_argument);

  // [[y,x],x], expanded and freely reduced by hand
  Word w = leftNormed({commutator(yw(), xw()), xw()});
  Word expected = parseWord("x^-1*y^-1*x*y*x^-1*y^-1*x^-1*y*x^2", Alphabet::fiber(2));
  CHECK(w == expected);
  CHECK(w.flatLength() == 10);
  CHECK(w.runCount() == 9);
}

TEST_CASE("word powers", "[words]") {
  Word x = xw(), y = yw();
  CHECK(pow(x, 0).isIdentity());
  CHECK(pow(product(x, y), 3) == parseWord("x*y*x*y*x*y", Alphabet::fiber(2)));
  CHECK(pow(product(x, y), -2) == parseWord("y^-1*x^-1*y^-1*x^-1", Alphabet::fiber(2)));

  // conjugate core: (y x y^-1)^5 = y x^5 y^-1
  Word conj = product(product(y, x), inverse(y));
  CHECK(pow(conj, 5) == parseWord("y*x^5*y^-1", Alphabet::fiber(2)));

  // single-run cores stay run-length even for huge exponents
  Int huge = intPow(Int(3), 40);
  Word big = pow(x, huge);
  CHECK(big.runCount() == 1);
  CHECK(big.flatLength() == huge);
  CHECK(pow(conj, huge).runCount() == 3);

  // multi-run cores with huge exponents exceed any run budget
  CHECK_THROWS_AS(pow(product(x, y), huge), resource_limit_error);
}

TEST_CASE("proper power detection", "[words]") {
  CHECK_THROWS_AS(properPower(Word()), std::invalid_argument);

  ProperPower p = properPower(pow(product(xw(), yw()), 3));
  CHECK(p.root == product(xw(), yw()));
  CHECK(p.exponent == 3);

  p = properPower(xw());
  CHECK(p.root == xw());
  CHECK(p.exponent == 1);

  p = properPower(Word::generator(0, -6));
  CHECK(p.root == Word::generator(0, -1));
  CHECK(p.exponent == 6);

  // conjugated power: y (xy)^3 y^-1 cyclically reduces to a cube
  Word w = product(product(yw(), pow(product(xw(), yw()), 3)), inverse(yw()));
  CHECK(properPower(w).exponent == 3);

  // relator of the preset presentation: b^-2 a b^2 b^-1 a^-3 b a^-1
  Alphabet pres({"a", "b"});
  Word relator = product(parseWord("a^(b^2)", pres), inverse(parseWord("a * a^3^b", pres)));
  CHECK(relator == parseWord("b^-2*a*b*a^-3*b*a^-1", pres));
  CHECK(properPower(relator).exponent == 1);
}

TEST_CASE("proper power agrees with a brute-force divisor scan", "[words][props]") {
  long checked = 0;
  for (int len = 1; len <= 12; ++len) {
    testutil::enumerateReducedWords(len, [&](const Word& w) {
      ProperPower p = properPower(w);
      std::vector<int> flat = flatten(cyclicReduce(w));
      const size_t L = flat.size();
      size_t bestK = 1;
      for (size_t d = 1; d <= L; ++d) {
        if (L % d != 0) continue;
        bool periodic = true;
        for (size_t i = d; i < L && periodic; ++i) periodic = flat[i] == flat[i - d];
        if (periodic) {
          bestK = L / d;
          break;
        }
      }
      REQUIRE(p.exponent == static_cast<long>(bestK));
      REQUIRE(flatten(pow(p.root, p.exponent)) == flat);
      ++checked;
    });
  }
  CHECK(checked > 1000000);
}

TEST_CASE("word literal parser", "[words]") {
  Alphabet pres({"a", "b"});
  CHECK(parseWord("1", pres).isIdentity());
  CHECK(parseWord("a^0", pres).isIdentity());
  CHECK(parseWord("a*b", pres) == parseWord("a b", pres));
  CHECK(parseWord("a^3", pres) == Word::generator(0, 3));
  CHECK(parseWord("b^-1", pres) == Word::generator(1, -1));
  CHECK(parseWord("a^b", pres) == parseWord("b^-1*a*b", pres));
  CHECK(parseWord("a^3^b", pres) == parseWord("b^-1*a^3*b", pres));
  CHECK(parseWord("[a,b]", pres) == commutator(Word::generator(0), Word::generator(1)));
  CHECK(parseWord("[a,b,a]", pres) ==
        leftNormed({Word::generator(0), Word::generator(1), Word::generator(0)}));
  CHECK(parseWord("[a, a^b]^(a^3^b * b^-1)", pres) ==
        conjugate(commutator(Word::generator(0), conjugate(Word::generator(0), Word::generator(1))),
                  product(conjugate(Word::generator(0, 3), Word::generator(1)), Word::generator(1, -1))));

  CHECK_THROWS_AS(parseWord("c", pres), std::invalid_argument);
  CHECK_THROWS_AS(parseWord("a)", pres), std::invalid_argument);
  CHECK_THROWS_AS(parseWord("[a]", pres), std::invalid_argument);
  CHECK_THROWS_AS(parseWord("", pres), std::invalid_argument);
  CHECK_THROWS_AS(parseWord("a^", pres), std::invalid_argument);
}

TEST_CASE("printing round-trips through the parser", "[words]") {
  Alphabet fib = Alphabet::fiber(2);
  std::mt19937_64 rng(17);
  for (int i = 0; i < 300; ++i) {
    Word w = testutil::randomWord(rng, 2, 30);
    CHECK(parseWord(toString(w, fib), fib) == w);
  }
}
