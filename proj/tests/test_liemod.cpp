#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "lcs/liemod.hpp"

using namespace lcs;

namespace {

IntMat paperU() {
  IntMat u(2, 2);
  u << 0, 1, 1, 3;
  return u;
}

IntMat randomUnimodular(std::mt19937_64& rng, int n) {
  // product of elementary matrices: determinant +-1 by construction
  std::uniform_int_distribution<int> d(-2, 2);
  std::uniform_int_distribution<int> pick(0, n - 1);
  IntMat m = IntMat::Identity(n, n);
  for (int step = 0; step < 6; ++step) {
    int i = pick(rng), j = pick(rng);
    if (i == j) continue;
    m.row(i) += m.row(j) * Int(d(rng));
  }
  if (pick(rng) == 0) m.row(0) = -m.row(0);
  return m;
}

}  // namespace

TEST_CASE("witt dimensions", "[liemod]") {
  const long expected[] = {2, 1, 2, 3, 6, 9, 18, 30};
  for (int n = 1; n <= 8; ++n) CHECK(wittDimension(2, n) == expected[n - 1]);
  CHECK(wittDimension(2, 6) == (64 - 8 - 4 + 2) / 6);
  CHECK(wittDimension(3, 1) == 3);
  CHECK(wittDimension(3, 8) == 810);
  CHECK_THROWS_AS(wittDimension(0, 1), std::invalid_argument);
}

TEST_CASE("lyndon words and hall bases", "[liemod]") {
  auto l3 = lyndonWords(2, 3);
  REQUIRE(l3.size() == 2);
  CHECK(l3[0] == std::vector<int>{0, 0, 1});
  CHECK(l3[1] == std::vector<int>{0, 1, 1});

  const auto& basis2 = hallBasis(2, 2);
  REQUIRE(basis2.size() == 1);
  Alphabet fib = Alphabet::fiber(2);
  CHECK(bracketString(basis2[0].tree, fib) == "[x,y]");

  const auto& basis3 = hallBasis(2, 3);
  REQUIRE(basis3.size() == 2);
  CHECK(bracketString(basis3[0].tree, fib) == "[x,[x,y]]");
  CHECK(bracketString(basis3[1].tree, fib) == "[[x,y],y]");

  for (int r = 2; r <= 3; ++r)
    for (int n = 1; n <= 8; ++n)
      CHECK(static_cast<long>(hallBasis(r, n).size()) == wittDimension(r, n));

  CHECK_THROWS_AS(hallBasis(2, 9), resource_limit_error);
}

TEST_CASE("hall bracket words expand with unit leading coefficient", "[liemod]") {
  for (int n = 2; n <= 5; ++n) {
    for (const HallElement& h : hallBasis(2, n)) {
      Word w = hallBracketWord(h.tree);
      TruncSeries s = expand(w, 2, n);
      long lead = monomialIndex(h.foliage, 2);
      CHECK(s.block(n)(lead) == 1);
    }
  }
}

TEST_CASE("lie power matrices", "[liemod]") {
  IntMat u = paperU();
  LiePowerMatrix l1 = liePowerMatrix(u, 1);
  CHECK(l1.matrix == u);

  LiePowerMatrix l2 = liePowerMatrix(u, 2);
  CHECK(l2.dimension == 1);
  CHECK(l2.matrix(0, 0) == -1);  // [Ux, Uy] = [y, x + 3y] = -[x,y]

  for (int n = 1; n <= 5; ++n) {
    LiePowerMatrix li = liePowerMatrix(IntMat::Identity(2, 2), n);
    CHECK(li.matrix == IntMat::Identity(li.dimension, li.dimension));
  }
}

TEST_CASE("lie power matrices are functorial", "[liemod][props]") {
  std::mt19937_64 rng(71);
  std::uniform_int_distribution<int> d(-3, 3);
  for (int trial = 0; trial < 12; ++trial) {
    IntMat a(2, 2), b(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        a(i, j) = d(rng);
        b(i, j) = d(rng);
      }
    for (int n = 2; n <= 5; ++n) {
      IntMat lhs = liePowerMatrix(IntMat(a * b), n).matrix;
      IntMat rhs = liePowerMatrix(a, n).matrix * liePowerMatrix(b, n).matrix;
      CHECK(lhs == IntMat(rhs));
    }
  }
}

TEST_CASE("unimodular actions induce unimodular lie actions", "[liemod][props]") {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 10; ++trial) {
    IntMat a = randomUnimodular(rng, 2);
    for (int n = 2; n <= 5; ++n) {
      Int det = determinantBareiss(liePowerMatrix(a, n).matrix);
      CHECK(abs(det) == 1);
    }
  }
}

TEST_CASE("lie power spectra sit inside tensor power spectra", "[liemod]") {
  IntMat u = paperU();
  for (int n = 2; n <= 6; ++n) {
    IntPoly liePoly = charPoly(liePowerMatrix(u, n).matrix);
    IntPoly kronPoly = charPoly(kroneckerPower(u, n));
    IntPoly sf = squarefreePart(liePoly);
    CHECK(divideExactMonic(kronPoly, sf).has_value());
  }
}
