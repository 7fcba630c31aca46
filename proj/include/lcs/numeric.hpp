#pragma once

#include <gmpxx.h>

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace Eigen {

// Exact arbitrary-precision integer scalar for dense matrices.
template <>
struct NumTraits<mpz_class> : GenericNumTraits<mpz_class> {
  using Real = mpz_class;
  using NonInteger = mpz_class;
  using Nested = mpz_class;
  using Literal = long;
  static inline Real epsilon() { return 0; }
  static inline Real dummy_precision() { return 0; }
  static inline int digits10() { return 0; }
  enum {
    IsInteger = 1,
    IsSigned = 1,
    IsComplex = 0,
    RequireInitialization = 1,
    ReadCost = 6,
    AddCost = 30,
    MulCost = 50
  };
};

}  // namespace Eigen

namespace lcs {

using Int = mpz_class;
using IntMat = Eigen::Matrix<Int, Eigen::Dynamic, Eigen::Dynamic>;
using IntVec = Eigen::Matrix<Int, Eigen::Dynamic, 1>;

// Thrown when an operation would exceed a configured size or memory limit.
struct resource_limit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a truncation cap is too small to decide the question asked.
struct precision_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Int intPow(const Int& base, unsigned long e) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return r;
}

// Quotient with remainder guaranteed zero.
inline Int exactDiv(const Int& a, const Int& b) {
  if (sgn(b) == 0) throw std::invalid_argument("exactDiv: division by zero");
  Int q, r;
  mpz_tdiv_qr(q.get_mpz_t(), r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  if (sgn(r) != 0) throw std::invalid_argument("exactDiv: not divisible");
  return q;
}

inline bool divides(const Int& d, const Int& a) {
  if (sgn(d) == 0) return sgn(a) == 0;
  return mpz_divisible_p(a.get_mpz_t(), d.get_mpz_t()) != 0;
}

// Floor division: a = q*b + r with 0 <= r < |b|.
inline void floorDivMod(const Int& a, const Int& b, Int& q, Int& r) {
  if (sgn(b) > 0)
    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  else
    mpz_cdiv_qr(q.get_mpz_t(), r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
}

inline long toLong(const Int& a) {
  if (!a.fits_slong_p()) throw std::invalid_argument("integer does not fit a machine long: " + a.get_str());
  return a.get_si();
}

inline std::string toString(const Int& a) { return a.get_str(); }

inline bool isZero(const IntMat& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (sgn(a(i, j)) != 0) return false;
  return true;
}

inline Int binomial(long n, long k) {
  Int r;
  if (k < 0) return 0;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return r;
}

// C(n, k) for arbitrary (possibly negative or huge) integer n, integral k >= 0.
inline Int generalizedBinomial(const Int& n, long k) {
  Int r = 1;
  for (long j = 0; j < k; ++j) {
    r *= n - j;
    r = exactDiv(r, Int(j + 1));
  }
  return r;
}

}  // namespace lcs
