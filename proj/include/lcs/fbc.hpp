#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lcs/numeric.hpp"
#include "lcs/words.hpp"

namespace lcs {

// Automorphism of a free group, given by generator images together with the
// images under the inverse. Inverse correctness is checked at construction.
class FreeAutomorphism {
 public:
  FreeAutomorphism(int rank, std::vector<Word> images, std::vector<Word> inverseImages, int powerCap = 12)
      : rank_(rank),
        images_(std::move(images)),
        inverseImages_(std::move(inverseImages)),
        powerCap_(powerCap),
        memo_(std::make_unique<Memo>()) {
    if (rank_ < 1) throw std::invalid_argument("FreeAutomorphism: rank must be >= 1");
    if (static_cast<int>(images_.size()) != rank_ || static_cast<int>(inverseImages_.size()) != rank_)
      throw std::invalid_argument("FreeAutomorphism: image count must equal rank");
    for (int i = 0; i < rank_; ++i) {
      if (images_[static_cast<size_t>(i)].maxGenIndex() >= rank_ ||
          inverseImages_[static_cast<size_t>(i)].maxGenIndex() >= rank_)
        throw std::invalid_argument("FreeAutomorphism: image uses generator beyond rank");
      Word xi = Word::generator(i);
      if (applyWords(inverseImages_, images_[static_cast<size_t>(i)]) != xi ||
          applyWords(images_, inverseImages_[static_cast<size_t>(i)]) != xi)
        throw std::invalid_argument("FreeAutomorphism: inverse images do not invert the map");
    }
  }

  FreeAutomorphism(const FreeAutomorphism& o)
      : rank_(o.rank_),
        images_(o.images_),
        inverseImages_(o.inverseImages_),
        powerCap_(o.powerCap_),
        memo_(std::make_unique<Memo>()) {}
  FreeAutomorphism& operator=(const FreeAutomorphism& o) {
    if (this != &o) {
      rank_ = o.rank_;
      images_ = o.images_;
      inverseImages_ = o.inverseImages_;
      powerCap_ = o.powerCap_;
      memo_ = std::make_unique<Memo>();
    }
    return *this;
  }
  FreeAutomorphism(FreeAutomorphism&&) = default;
  FreeAutomorphism& operator=(FreeAutomorphism&&) = default;

  static FreeAutomorphism identity(int rank) {
    std::vector<Word> gens;
    for (int i = 0; i < rank; ++i) gens.push_back(Word::generator(i));
    return FreeAutomorphism(rank, gens, gens);
  }

  // Derives the inverse images by exhaustive search over reduced words of
  // flat length <= maxSearchLength.
  static FreeAutomorphism withDerivedInverse(int rank, std::vector<Word> images, long maxSearchLength = 8,
                                             int powerCap = 12) {
    std::vector<Word> inv(static_cast<size_t>(rank));
    std::vector<bool> found(static_cast<size_t>(rank), false);
    int remaining = rank;
    std::vector<Word> frontier{Word()};
    for (long len = 1; len <= maxSearchLength && remaining > 0; ++len) {
      std::vector<Word> next;
      for (const Word& w : frontier) {
        for (int g = 0; g < rank && remaining > 0; ++g) {
          for (int s : {1, -1}) {
            Word cand = product(w, Word::generator(g, s));
            if (cand.flatLength() != len) continue;  // cancelled: shorter word, seen before
            Word img = applyWords(images, cand);
            for (int i = 0; i < rank; ++i) {
              if (!found[static_cast<size_t>(i)] && img == Word::generator(i)) {
                inv[static_cast<size_t>(i)] = cand;
                found[static_cast<size_t>(i)] = true;
                --remaining;
              }
            }
            next.push_back(std::move(cand));
          }
        }
      }
      frontier = std::move(next);
    }
    if (remaining > 0)
      throw std::invalid_argument(
          "FreeAutomorphism: could not derive inverse images by search up to flat length " +
          std::to_string(maxSearchLength) + "; supply them explicitly");
    return FreeAutomorphism(rank, std::move(images), std::move(inv), powerCap);
  }

  int rank() const { return rank_; }
  int powerCap() const { return powerCap_; }
  const std::vector<Word>& images() const { return images_; }
  const std::vector<Word>& inverseImages() const { return inverseImages_; }

  static Word applyWords(const std::vector<Word>& images, const Word& w) {
    Word r;
    for (const Run& run : w.runs()) r.appendWord(pow(images[static_cast<size_t>(run.gen)], run.exp));
    return r;
  }

  Word apply(const Word& w) const { return applyWords(images_, w); }
  Word applyInverse(const Word& w) const { return applyWords(inverseImages_, w); }

  // phi^k(x_g), memoized per generator. |k| beyond the cap is refused since
  // image lengths grow exponentially.
  Word powerImage(int g, long k) const {
    if (g < 0 || g >= rank_) throw std::invalid_argument("powerImage: generator out of range");
    if (k == 0) return Word::generator(g);
    if (k > powerCap_ || k < -powerCap_)
      throw resource_limit_error("powerImage: |k| = " + std::to_string(k < 0 ? -k : k) +
                                 " exceeds cap " + std::to_string(powerCap_));
    std::lock_guard<std::mutex> lock(memo_->mu);
    auto& table = k > 0 ? memo_->pos : memo_->neg;
    const auto& base = k > 0 ? images_ : inverseImages_;
    size_t steps = static_cast<size_t>(k > 0 ? k : -k);
    if (table.empty()) table.push_back(base);
    while (table.size() < steps) {
      std::vector<Word> nextLevel;
      nextLevel.reserve(static_cast<size_t>(rank_));
      for (int i = 0; i < rank_; ++i) nextLevel.push_back(applyWords(base, table.back()[static_cast<size_t>(i)]));
      table.push_back(std::move(nextLevel));
    }
    return table[steps - 1][static_cast<size_t>(g)];
  }

  Word applyPower(const Word& w, const Int& k) const {
    if (sgn(k) == 0 || w.isIdentity()) return w;
    long steps = toLong(k);  // powerImage rejects |k| beyond the cap anyway
    Word r;
    for (const Run& run : w.runs()) r.appendWord(pow(powerImage(run.gen, steps), run.exp));
    return r;
  }

 private:
  struct Memo {
    std::mutex mu;
    std::vector<std::vector<Word>> pos, neg;  // pos[k-1][g] = phi^k(x_g)
  };

  int rank_;
  std::vector<Word> images_;
  std::vector<Word> inverseImages_;
  int powerCap_;
  mutable std::unique_ptr<Memo> memo_;
};

// Normal form of an element of F_n x|_phi Z: fiber word times t^shift,
// with the t-power collected on the right (x^t = phi(x)).
struct FbcElement {
  Word fiber;
  Int shift = 0;

  bool isIdentity() const { return fiber.isIdentity() && sgn(shift) == 0; }
  bool operator==(const FbcElement& o) const { return fiber == o.fiber && shift == o.shift; }
};

// A free-by-cyclic group with a chosen presentation alphabet embedded into it.
class FbcGroup {
 public:
  FbcGroup(Alphabet fiberAlphabet, FreeAutomorphism phi, Alphabet presentationAlphabet,
           std::vector<FbcElement> embedding)
      : fiber_(std::move(fiberAlphabet)),
        phi_(std::move(phi)),
        pres_(std::move(presentationAlphabet)),
        embedding_(std::move(embedding)) {
    if (fiber_.rank() != phi_.rank())
      throw std::invalid_argument("FbcGroup: fiber alphabet rank != automorphism rank");
    if (static_cast<int>(embedding_.size()) != pres_.rank())
      throw std::invalid_argument("FbcGroup: embedding must cover the presentation alphabet");
    for (const FbcElement& e : embedding_)
      if (e.fiber.maxGenIndex() >= fiber_.rank())
        throw std::invalid_argument("FbcGroup: embedded fiber word beyond rank");
  }

  // G = <a, b | a^{b^2} = a a^{3b}> as F(x, y) x| Z with x -> y, y -> x y^3.
  static FbcGroup paperPreset(int powerCap = 12) {
    Alphabet fib = Alphabet::fiber(2);
    Word x = Word::generator(0), y = Word::generator(1);
    FreeAutomorphism phi(2, {y, product(x, pow(y, 3))}, {product(y, pow(x, -3)), x}, powerCap);
    Alphabet pres({"a", "b"});
    return FbcGroup(std::move(fib), std::move(phi), std::move(pres),
                    {FbcElement{x, 0}, FbcElement{Word(), 1}});
  }

  // Same shape with x -> y, y -> x^-1 y^3; the abelianized action is the
  // companion matrix of x^2 - 3x + 1, whose module is not residually
  // nilpotent.
  static FbcGroup contrastPreset(int powerCap = 12) {
    Alphabet fib = Alphabet::fiber(2);
    Word x = Word::generator(0), y = Word::generator(1);
    FreeAutomorphism phi(2, {y, product(pow(x, -1), pow(y, 3))}, {product(pow(x, 3), pow(y, -1)), x}, powerCap);
    Alphabet pres({"a", "b"});
    return FbcGroup(std::move(fib), std::move(phi), std::move(pres),
                    {FbcElement{x, 0}, FbcElement{Word(), 1}});
  }

  const Alphabet& fiberAlphabet() const { return fiber_; }
  const Alphabet& presentationAlphabet() const { return pres_; }
  const FreeAutomorphism& phi() const { return phi_; }
  const std::vector<FbcElement>& embedding() const { return embedding_; }
  int rank() const { return fiber_.rank(); }

  // (u, s)(v, r) = (u phi^{-s}(v), s + r)
  FbcElement multiply(const FbcElement& a, const FbcElement& b) const {
    Word moved = phi_.applyPower(b.fiber, -a.shift);
    return FbcElement{product(a.fiber, moved), a.shift + b.shift};
  }

  FbcElement inverse(const FbcElement& a) const {
    return FbcElement{phi_.applyPower(lcs::inverse(a.fiber), a.shift), -a.shift};
  }

  FbcElement power(const FbcElement& a, const Int& e) const {
    if (sgn(e) == 0) return FbcElement{};
    if (sgn(a.shift) == 0) return FbcElement{pow(a.fiber, e), 0};
    if (a.fiber.isIdentity()) return FbcElement{Word(), a.shift * e};
    FbcElement base = sgn(e) > 0 ? a : inverse(a);
    Int k = abs(e);
    FbcElement r;
    while (sgn(k) != 0) {
      if (mpz_odd_p(k.get_mpz_t())) r = multiply(r, base);
      k >>= 1;
      if (sgn(k) != 0) base = multiply(base, base);
    }
    return r;
  }

  // Normal form of a word over the presentation alphabet.
  FbcElement normalForm(const Word& w) const {
    if (w.maxGenIndex() >= pres_.rank())
      throw std::invalid_argument("normalForm: word beyond presentation alphabet");
    FbcElement acc;
    for (const Run& r : w.runs())
      acc = multiply(acc, power(embedding_[static_cast<size_t>(r.gen)], r.exp));
    return acc;
  }

  // Abelianized action of phi on Z^rank; column i is the exponent vector of
  // the image of x_i.
  IntMat abelianization() const {
    const int n = rank();
    IntMat m = IntMat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (const Run& r : phi_.images()[static_cast<size_t>(i)].runs()) m(r.gen, i) += r.exp;
    return m;
  }

  std::string describeElement(const FbcElement& e) const {
    return "(" + toString(e.fiber, fiber_) + ", " + toString(e.shift) + ")";
  }

 private:
  Alphabet fiber_;
  FreeAutomorphism phi_;
  Alphabet pres_;
  std::vector<FbcElement> embedding_;
};

struct IdentityVerdict {
  bool equal = false;
  FbcElement witness;  // normal form of rhs^-1 lhs; identity iff equal
};

inline IdentityVerdict verifyIdentity(const FbcGroup& g, const Word& lhs, const Word& rhs) {
  FbcElement w = g.normalForm(product(inverse(rhs), lhs));
  return IdentityVerdict{w.isIdentity(), std::move(w)};
}

struct IdentityPair {
  std::string name;
  std::string lhs;
  std::string rhs;
};

struct IdentityCheckResult {
  IdentityPair identity;
  bool equal = false;
  std::string lhsNormalForm;
  std::string rhsNormalForm;
  std::string witness;
};

struct IdentityReport {
  std::vector<IdentityCheckResult> checks;
  bool allEqual = true;
};

// The six word identities driving the torsion analysis of the preset group.
inline std::vector<IdentityPair> paperIdentityList() {
  return {
      {"defining relation", "a^(b^2)", "a * a^3^b"},
      {"cube of a as a commutator", "a^3", "[a,b^2]^(b^-1)"},
      {"cube of the conjugate", "(a^b)^3", "[a,b^2]"},
      {"relation bracketed with a^b", "[a^(b^2), a^b]", "[a,a^b]^(a^3^b)"},
      {"reversed bracket as a conjugate", "[a^b, a]", "[a,a^b]^(a^3^b * b^-1)"},
      {"square of the reversed bracket", "[a^b,a]^2", "[a, a^b, a^3^b * b^-1]"},
  };
}

inline IdentityReport identitySuite(const FbcGroup& g, const std::vector<IdentityPair>& identities) {
  IdentityReport report;
  for (const IdentityPair& id : identities) {
    Word lhs = parseWord(id.lhs, g.presentationAlphabet());
    Word rhs = parseWord(id.rhs, g.presentationAlphabet());
    IdentityVerdict v = verifyIdentity(g, lhs, rhs);
    IdentityCheckResult res;
    res.identity = id;
    res.equal = v.equal;
    res.lhsNormalForm = g.describeElement(g.normalForm(lhs));
    res.rhsNormalForm = g.describeElement(g.normalForm(rhs));
    res.witness = g.describeElement(v.witness);
    report.allEqual = report.allEqual && v.equal;
    report.checks.push_back(std::move(res));
  }
  return report;
}

// Relator of the one-relator presentation: a^{b^2} (a a^{3b})^-1.
inline Word paperRelator(const Alphabet& pres) {
  Word lhs = parseWord("a^(b^2)", pres);
  Word rhs = parseWord("a * a^3^b", pres);
  return product(lhs, inverse(rhs));
}

}  // namespace lcs
