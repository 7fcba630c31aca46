#pragma once

#include <span>
#include <string>
#include <vector>

#include "lcs/numeric.hpp"
#include "lcs/words.hpp"

namespace lcs {

// Index of a degree-d monomial X_{i1}..X_{id} inside its dense degree block:
// the base-r number with digits i1..id. Numeric order = lex order.
inline long monomialIndex(std::span<const int> letters, int rank) {
  long idx = 0;
  for (int g : letters) idx = idx * rank + g;
  return idx;
}

inline std::vector<int> monomialLetters(long index, int degree, int rank) {
  std::vector<int> w(static_cast<size_t>(degree));
  for (int p = degree - 1; p >= 0; --p) {
    w[static_cast<size_t>(p)] = static_cast<int>(index % rank);
    index /= rank;
  }
  return w;
}

inline long intPowLong(int base, int e) {
  long r = 1;
  while (e-- > 0) r *= base;
  return r;
}

// Truncated series in noncommuting variables X_1..X_r with integer
// coefficients, stored densely per total degree 1..cap plus a constant term.
class TruncSeries {
 public:
  TruncSeries(int rank, int cap) : rank_(rank), cap_(cap) {
    if (rank < 1 || cap < 1) throw std::invalid_argument("TruncSeries: rank and cap must be >= 1");
    blocks_.reserve(static_cast<size_t>(cap));
    for (int d = 1; d <= cap; ++d) blocks_.push_back(IntVec::Zero(intPowLong(rank, d)));
  }

  static TruncSeries one(int rank, int cap) {
    TruncSeries s(rank, cap);
    s.constant_ = 1;
    return s;
  }

  int rank() const { return rank_; }
  int cap() const { return cap_; }
  const Int& constant() const { return constant_; }
  Int& constant() { return constant_; }
  const IntVec& block(int d) const { return blocks_[static_cast<size_t>(d - 1)]; }
  IntVec& block(int d) { return blocks_[static_cast<size_t>(d - 1)]; }

  const Int& coeff(int degree, long index) const { return block(degree)(index); }

  bool isOne() const {
    if (constant_ != 1) return false;
    return nonconstantZero();
  }

  bool nonconstantZero() const {
    for (const IntVec& b : blocks_)
      for (Eigen::Index i = 0; i < b.size(); ++i)
        if (sgn(b(i)) != 0) return false;
    return true;
  }

  // Total number of nonconstant coordinate positions.
  long positionCount() const {
    long n = 0;
    for (const IntVec& b : blocks_) n += b.size();
    return n;
  }

  // Degree-major position of a (degree, index) coordinate.
  long positionOf(int degree, long index) const {
    long off = 0;
    for (int d = 1; d < degree; ++d) off += block(d).size();
    return off + index;
  }

  std::pair<int, long> degreeIndexOf(long pos) const {
    for (int d = 1; d <= cap_; ++d) {
      long n = block(d).size();
      if (pos < n) return {d, pos};
      pos -= n;
    }
    throw std::invalid_argument("TruncSeries: position out of range");
  }

  // First nonzero nonconstant position in degree-major order, or -1.
  long firstNonzeroPosition() const {
    long off = 0;
    for (const IntVec& b : blocks_) {
      for (Eigen::Index i = 0; i < b.size(); ++i)
        if (sgn(b(i)) != 0) return off + i;
      off += b.size();
    }
    return -1;
  }

  const Int& coeffAtPosition(long pos) const {
    auto [d, i] = degreeIndexOf(pos);
    return block(d)(i);
  }

  // Lowest nonzero nonconstant degree, or 0 when none.
  int minDegree() const {
    for (int d = 1; d <= cap_; ++d) {
      const IntVec& b = block(d);
      for (Eigen::Index i = 0; i < b.size(); ++i)
        if (sgn(b(i)) != 0) return d;
    }
    return 0;
  }

  bool operator==(const TruncSeries& o) const {
    if (rank_ != o.rank_ || cap_ != o.cap_ || constant_ != o.constant_) return false;
    for (int d = 1; d <= cap_; ++d)
      if (block(d) != o.block(d)) return false;
    return true;
  }

 private:
  int rank_;
  int cap_;
  Int constant_ = 0;
  std::vector<IntVec> blocks_;
};

inline void checkCompatible(const TruncSeries& a, const TruncSeries& b) {
  if (a.rank() != b.rank() || a.cap() != b.cap())
    throw std::invalid_argument("TruncSeries: rank/cap mismatch");
}

inline TruncSeries add(const TruncSeries& a, const TruncSeries& b) {
  checkCompatible(a, b);
  TruncSeries r = a;
  r.constant() += b.constant();
  for (int d = 1; d <= r.cap(); ++d) r.block(d) += b.block(d);
  return r;
}

inline TruncSeries negate(const TruncSeries& a) {
  TruncSeries r = a;
  r.constant() = -r.constant();
  for (int d = 1; d <= r.cap(); ++d) r.block(d) = -r.block(d);
  return r;
}

inline TruncSeries mul(const TruncSeries& a, const TruncSeries& b) {
  checkCompatible(a, b);
  const int rank = a.rank(), cap = a.cap();
  TruncSeries r(rank, cap);
  r.constant() = a.constant() * b.constant();
  for (int f = 1; f <= cap; ++f) {
    IntVec& target = r.block(f);
    if (sgn(b.constant()) != 0) target += a.block(f) * b.constant();
    if (sgn(a.constant()) != 0) target += b.block(f) * a.constant();
    for (int d = 1; d < f; ++d) {
      const int e = f - d;
      const IntVec& ba = a.block(d);
      const IntVec& bb = b.block(e);
      const long stride = bb.size();
      for (long i = 0; i < ba.size(); ++i) {
        if (sgn(ba(i)) == 0) continue;
        const Int& ci = ba(i);
        Int* dst = target.data() + i * stride;
        for (long j = 0; j < stride; ++j) {
          if (sgn(bb(j)) != 0) dst[j] += ci * bb(j);
        }
      }
    }
  }
  return r;
}

// s * (1 + X_g)^e, using only the single-variable structure of the factor.
inline TruncSeries mulGeneratorPower(const TruncSeries& s, int g, const Int& e) {
  const int rank = s.rank(), cap = s.cap();
  TruncSeries r = s;
  std::vector<Int> binom(static_cast<size_t>(cap) + 1);
  binom[0] = 1;
  for (int k = 1; k <= cap; ++k) binom[static_cast<size_t>(k)] = generalizedBinomial(e, k);
  // Offsets of the monomial g^k within a degree-k block.
  std::vector<long> tail(static_cast<size_t>(cap) + 1, 0);
  for (int k = 1; k <= cap; ++k) tail[static_cast<size_t>(k)] = tail[static_cast<size_t>(k - 1)] * rank + g;
  for (int f = cap; f >= 1; --f) {
    IntVec& target = r.block(f);
    for (int k = 1; k <= f; ++k) {
      const Int& c = binom[static_cast<size_t>(k)];
      if (sgn(c) == 0) continue;
      const long shift = intPowLong(rank, k);
      if (k == f) {
        if (sgn(s.constant()) != 0) target(tail[static_cast<size_t>(k)]) += s.constant() * c;
        continue;
      }
      const IntVec& src = s.block(f - k);
      for (long i = 0; i < src.size(); ++i)
        if (sgn(src(i)) != 0) target(i * shift + tail[static_cast<size_t>(k)]) += src(i) * c;
    }
  }
  return r;
}

// Magnus image of a word: each generator g maps to 1 + X_g.
inline TruncSeries expand(const Word& w, int rank, int cap) {
  if (w.maxGenIndex() >= rank) throw std::invalid_argument("expand: word uses generator beyond rank");
  TruncSeries s = TruncSeries::one(rank, cap);
  for (const Run& r : w.runs()) s = mulGeneratorPower(s, r.gen, r.exp);
  return s;
}

// (1 + E)^e for a unit series, any integer exponent: in the truncated ring E
// is nilpotent, so the generalized binomial sum Sum_k C(e, k) E^k is exact and
// costs at most cap multiplications however large e is.
inline TruncSeries seriesPow(const TruncSeries& s, const Int& e) {
  if (s.constant() != 1) throw std::invalid_argument("seriesPow: constant term must be 1");
  const int cap = s.cap();
  TruncSeries nil = s;
  nil.constant() = 0;
  TruncSeries r = TruncSeries::one(s.rank(), cap);
  TruncSeries epow = TruncSeries::one(s.rank(), cap);
  Int binom = 1;
  for (int k = 1; k <= cap; ++k) {
    epow = mul(epow, nil);
    if (epow.nonconstantZero()) break;
    binom = exactDiv(binom * (e - (k - 1)), Int(k));
    if (sgn(binom) == 0) continue;
    for (int d = 1; d <= cap; ++d) {
      const IntVec& src = epow.block(d);
      IntVec& dst = r.block(d);
      for (long i = 0; i < src.size(); ++i)
        if (sgn(src(i)) != 0) dst(i) += binom * src(i);
    }
  }
  return r;
}

// Inverse of a series with constant term 1.
inline TruncSeries inverseUnit(const TruncSeries& s) { return seriesPow(s, -1); }

inline TruncSeries seriesConjugate(const TruncSeries& s, const TruncSeries& by) {
  return mul(mul(inverseUnit(by), s), by);
}

inline TruncSeries seriesCommutator(const TruncSeries& u, const TruncSeries& v) {
  return mul(mul(mul(inverseUnit(u), inverseUnit(v)), u), v);
}

// Weight of a word: the lowest degree with a nonzero coefficient in
// expand(w) - 1. exact = false means only the bound "weight >= cap + 1"
// is known at this cap.
struct WeightResult {
  int bound = 0;
  bool exact = true;
};

inline WeightResult weightOf(const TruncSeries& s) {
  int d = s.minDegree();
  if (d == 0) return WeightResult{s.cap() + 1, false};
  return WeightResult{d, true};
}

inline WeightResult weight(const Word& w, int rank, int cap) {
  return weightOf(expand(w, rank, cap));
}

// Exact membership in gamma_n of the free group (Magnus): weight(w) >= n.
inline bool isInGamma(const Word& w, int n, int rank, int cap) {
  if (n < 1) throw std::invalid_argument("isInGamma: n must be >= 1");
  if (n > cap + 1) throw precision_error("isInGamma: cap " + std::to_string(cap) + " cannot decide class " + std::to_string(n));
  WeightResult wr = weight(w, rank, cap);
  return wr.bound >= n;
}

namespace detail {

// Child slice of s along first letter i: the series T with s = ... + X_i*T + ...
inline TruncSeries childSlice(const TruncSeries& s, int i) {
  const int rank = s.rank(), cap = s.cap();
  TruncSeries t(rank, cap);
  t.constant() = s.block(1)(i);
  for (int d = 1; d < cap; ++d) {
    const long n = t.block(d).size();
    t.block(d) = s.block(d + 1).segment(i * n, n);
  }
  return t;
}

inline TruncSeries substituteImpl(const TruncSeries& s, const std::vector<TruncSeries>& gensMinusOne) {
  const int rank = s.rank(), cap = s.cap();
  TruncSeries r(rank, cap);
  r.constant() = s.constant();
  for (int i = 0; i < rank; ++i) {
    TruncSeries child = childSlice(s, i);
    if (sgn(child.constant()) == 0 && child.nonconstantZero()) continue;
    r = add(r, mul(gensMinusOne[static_cast<size_t>(i)], substituteImpl(child, gensMinusOne)));
  }
  return r;
}

}  // namespace detail

// Ring endomorphism induced by X_i -> expand(images[i]) - 1. Functorial:
// substitute(expand(w), images) = expand(images applied to w).
inline TruncSeries substitute(const TruncSeries& s, const std::vector<Word>& images) {
  if (static_cast<int>(images.size()) != s.rank())
    throw std::invalid_argument("substitute: rank mismatch");
  std::vector<TruncSeries> gens;
  gens.reserve(images.size());
  for (const Word& w : images) {
    TruncSeries g = expand(w, s.rank(), s.cap());
    g.constant() = 0;
    gens.push_back(std::move(g));
  }
  return detail::substituteImpl(s, gens);
}

inline std::string toString(const TruncSeries& s, const Alphabet& a) {
  std::string out = toString(s.constant());
  for (int d = 1; d <= s.cap(); ++d) {
    const IntVec& b = s.block(d);
    for (long i = 0; i < b.size(); ++i) {
      if (sgn(b(i)) == 0) continue;
      const Int& c = b(i);
      out += sgn(c) < 0 ? " - " : " + ";
      out += toString(Int(abs(c)));
      for (int g : monomialLetters(i, d, s.rank())) {
        out += ".";
        out += a.name(g);
      }
    }
  }
  return out;
}

}  // namespace lcs
