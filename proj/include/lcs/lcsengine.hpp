#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lcs/fbc.hpp"
#include "lcs/latmod.hpp"
#include "lcs/liemod.hpp"
#include "lcs/magnus.hpp"
#include "lcs/numeric.hpp"
#include "lcs/words.hpp"

namespace lcs {

struct EngineConfig {
  FbcGroup group;
  int classCap = 7;                  // compute gamma_n(G) for 2 <= n <= classCap
  long positionBudget = 1L << 22;    // stored coefficients per series
};

// Echelonized generating sequence for a subgroup of the free nilpotent
// quotient, held in truncated Magnus coordinates. Pivot positions strictly
// increase in degree-major order; leading coefficients are positive.
// Multiplying group-element series only perturbs coordinates at or after the
// smaller leading position, which is what makes integer echelon sifting
// sound here.
class SiftedBasis {
 public:
  struct Element {
    TruncSeries series;
    std::optional<Word> provenance;
    long leadPos = 0;
    Int leadCoeff;
    long id = 0;
  };

  SiftedBasis(int rank, int cap) : rank_(rank), cap_(cap) {}

  int rank() const { return rank_; }
  int cap() const { return cap_; }
  const std::vector<Element>& elements() const { return elems_; }
  size_t size() const { return elems_.size(); }

  std::optional<size_t> pivotAt(long pos) const {
    size_t lo = 0, hi = elems_.size();
    while (lo < hi) {
      size_t mid = (lo + hi) / 2;
      if (elems_[mid].leadPos < pos)
        lo = mid + 1;
      else
        hi = mid;
    }
    if (lo < elems_.size() && elems_[lo].leadPos == pos) return lo;
    return std::nullopt;
  }

  // Greedy elimination against the pivots; the residue is the identity
  // series exactly when s lies in the subgroup the basis spans.
  TruncSeries residue(TruncSeries s) const {
    for (;;) {
      long p = s.firstNonzeroPosition();
      if (p < 0) return s;
      auto idx = pivotAt(p);
      if (!idx) return s;
      const Element& e = elems_[*idx];
      const Int& c = s.coeffAtPosition(p);
      if (!divides(e.leadCoeff, c)) return s;
      s = mul(s, seriesPow(e.series, -exactDiv(c, e.leadCoeff)));
    }
  }

  bool contains(const TruncSeries& s) const { return residue(s).firstNonzeroPosition() < 0; }

  // Pivot exponents of a member: s equals the pivot-ordered product of
  // basis elements with these exponents (taken in decreasing pivot order).
  std::optional<std::vector<Int>> exponents(TruncSeries s) const {
    std::vector<Int> out(elems_.size(), Int(0));
    for (;;) {
      long p = s.firstNonzeroPosition();
      if (p < 0) return out;
      auto idx = pivotAt(p);
      if (!idx) return std::nullopt;
      const Element& e = elems_[*idx];
      const Int& c = s.coeffAtPosition(p);
      if (!divides(e.leadCoeff, c)) return std::nullopt;
      Int q = exactDiv(c, e.leadCoeff);
      out[*idx] = q;
      s = mul(s, seriesPow(e.series, -q));
    }
  }

  // Sift-insert with gcd combination at equal leading positions (the
  // nonabelian Hermite step). Returns true when the table changed.
  bool insert(TruncSeries s, std::optional<Word> prov) {
    bool changed = false;
    for (;;) {
      long p = s.firstNonzeroPosition();
      if (p < 0) return changed;
      if (sgn(s.coeffAtPosition(p)) < 0) {
        s = inverseUnit(s);
        if (prov) prov = lcs::inverse(*prov);
      }
      Int c = s.coeffAtPosition(p);
      auto idxOpt = pivotAt(p);
      if (!idxOpt) {
        insertSorted(Element{std::move(s), std::move(prov), p, std::move(c), nextId_++});
        return true;
      }
      size_t idx = *idxOpt;
      Int q = c / elems_[idx].leadCoeff;  // both positive
      if (sgn(q) != 0) {
        s = mul(s, seriesPow(elems_[idx].series, -q));
        prov = combineProvenance(std::move(prov), elems_[idx].provenance, -q);
      }
      long p2 = s.firstNonzeroPosition();
      if (p2 < 0) return changed;
      if (p2 > p) continue;
      if (p2 < p) throw std::logic_error("SiftedBasis: reduction moved the leading position backwards");
      // remainder 0 < c' < pivot: swap roles and continue the euclidean descent
      Element old = std::move(elems_[idx]);
      Int c2 = s.coeffAtPosition(p);
      elems_[idx] = Element{std::move(s), std::move(prov), p, std::move(c2), nextId_++};
      changed = true;
      s = std::move(old.series);
      prov = std::move(old.provenance);
    }
  }

  // Canonical form: every element's coefficient at each later pivot is
  // reduced into [0, pivot coefficient).
  void normalize() {
    for (size_t i = 0; i < elems_.size(); ++i) {
      for (size_t j = i + 1; j < elems_.size(); ++j) {
        Int quo, rem;
        floorDivMod(elems_[i].series.coeffAtPosition(elems_[j].leadPos), elems_[j].leadCoeff, quo, rem);
        if (sgn(quo) != 0) {
          elems_[i].series = mul(elems_[i].series, seriesPow(elems_[j].series, -quo));
          elems_[i].provenance =
              combineProvenance(std::move(elems_[i].provenance), elems_[j].provenance, -quo);
        }
      }
    }
  }

  std::string dump(const Alphabet& a) const {
    std::string out;
    for (const Element& e : elems_) {
      auto [deg, idx] = e.series.degreeIndexOf(e.leadPos);
      out += "pivot ";
      bool first = true;
      for (int g : monomialLetters(idx, deg, rank_)) {
        if (!first) out += ".";
        out += a.name(g);
        first = false;
      }
      out += " coeff " + toString(e.leadCoeff);
      out += " prov " + (e.provenance ? toString(*e.provenance, a) : std::string("-"));
      out += " series " + toString(e.series, a);
      out += "\n";
    }
    return out;
  }

 private:
  static std::optional<Word> combineProvenance(std::optional<Word> a, const std::optional<Word>& b, const Int& e) {
    if (!a || !b) return std::nullopt;
    try {
      Word w = product(*a, pow(*b, e, 1024));
      if (w.flatLength() > 512) return std::nullopt;
      return w;
    } catch (const resource_limit_error&) {
      return std::nullopt;
    }
  }

  void insertSorted(Element e) {
    size_t lo = 0, hi = elems_.size();
    while (lo < hi) {
      size_t mid = (lo + hi) / 2;
      if (elems_[mid].leadPos < e.leadPos)
        lo = mid + 1;
      else
        hi = mid;
    }
    elems_.insert(elems_.begin() + static_cast<long>(lo), std::move(e));
  }

  int rank_;
  int cap_;
  long nextId_ = 0;
  std::vector<Element> elems_;
};

struct ClosureStats {
  std::vector<int> iterations;  // per computed basis W_2..W_c
};

struct CertificateReport {
  long checked = 0;
  long failures = 0;
  std::vector<std::string> failureNotes;
  bool allHold() const { return failures == 0; }
};

struct GammaOmegaReport {
  bool candidateInAllClasses = false;
  bool candidateClosureContained = false;
  bool generatorOutsideGamma2 = false;
  bool h2PieceIsZ2 = false;
  bool allHold() const {
    return candidateInAllClasses && candidateClosureContained && generatorOutsideGamma2 && h2PieceIsZ2;
  }
};

// Computes W_n = gamma_n(G) cap F for 2 <= n <= classCap, working modulo
// gamma_classCap(F). Membership answers for class <= classCap are exact
// because gamma_n(G) contains gamma_classCap(F) there: the truncation only
// discards elements the subgroup holds anyway.
class LcsEngine {
 public:
  explicit LcsEngine(EngineConfig cfg) : cfg_(std::move(cfg)), seriesCap_(cfg_.classCap - 1) {
    if (cfg_.classCap < 3) throw std::invalid_argument("LcsEngine: classCap must be >= 3");
    long positions = 0, power = 1;
    for (int d = 1; d <= seriesCap_; ++d) {
      power *= rank();
      positions += power;
      if (positions > cfg_.positionBudget)
        throw resource_limit_error("LcsEngine: series blocks exceed the position budget");
    }
    build();
  }

  const FbcGroup& group() const { return cfg_.group; }
  int classCap() const { return cfg_.classCap; }
  int seriesCap() const { return seriesCap_; }
  int rank() const { return cfg_.group.rank(); }
  const ClosureStats& stats() const { return stats_; }

  const SiftedBasis& basis(int n) const {
    if (n < 2 || n > cfg_.classCap) throw std::invalid_argument("LcsEngine: class out of range");
    return bases_[static_cast<size_t>(n - 2)];
  }

  // Exact membership of a fiber word in gamma_n(G), 2 <= n <= classCap.
  bool member(const Word& w, int n) const {
    if (w.maxGenIndex() >= rank()) throw std::invalid_argument("member: word beyond fiber rank");
    return basis(n).contains(expand(w, rank(), seriesCap_));
  }

  // Invariant factors of gamma_n(G)/gamma_{n+1}(G), cleaned (0 = free
  // summand). n = 1 comes from the abelianization.
  std::vector<Int> gradedInvariants(int n) const {
    if (n == 1) {
      IntMat ab = cfg_.group.abelianization();
      IntMat shifted = ab - IntMat::Identity(ab.rows(), ab.cols());
      std::vector<Int> f = smithNormalForm(shifted).invariantFactors;
      f.push_back(0);  // the cyclic direction
      return cleanedFactors(std::move(f));
    }
    if (n < 2 || n > cfg_.classCap - 1)
      throw std::invalid_argument("gradedInvariants: class out of range");
    const SiftedBasis& wn = basis(n);
    const SiftedBasis& wn1 = basis(n + 1);
    const size_t r = wn.size();
    std::vector<std::vector<Int>> rows;
    auto pushRelation = [&](const TruncSeries& s) {
      auto e = wn.exponents(s);
      if (!e) throw std::logic_error("gradedInvariants: relation element escapes W_n");
      rows.push_back(std::move(*e));
    };
    for (const auto& h : wn1.elements()) pushRelation(h.series);
    // Relations from commutators among the generators of W_n: these land in
    // [W_n, W_n] <= W_{n+1} and complete the abelianized relation lattice.
    std::vector<TruncSeries> frontier;
    auto leadDegree = [&](const TruncSeries& s) { return s.minDegree(); };
    for (size_t i = 0; i < r; ++i) {
      for (size_t j = i + 1; j < r; ++j) {
        const auto& gi = wn.elements()[i].series;
        const auto& gj = wn.elements()[j].series;
        if (leadDegree(gi) + leadDegree(gj) > seriesCap_) continue;
        TruncSeries c = seriesCommutator(gi, gj);
        if (c.nonconstantZero()) continue;
        pushRelation(c);
        frontier.push_back(std::move(c));
      }
    }
    while (!frontier.empty()) {
      std::vector<TruncSeries> next;
      for (const TruncSeries& c : frontier) {
        for (size_t k = 0; k < r; ++k) {
          const auto& gk = wn.elements()[k].series;
          if (leadDegree(c) + leadDegree(gk) > seriesCap_) continue;
          TruncSeries d = seriesCommutator(c, gk);
          if (d.nonconstantZero()) continue;
          pushRelation(d);
          next.push_back(std::move(d));
        }
      }
      frontier = std::move(next);
    }
    IntMat rel(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(r));
    for (size_t i = 0; i < rows.size(); ++i)
      for (size_t j = 0; j < r; ++j) rel(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    std::vector<Int> factors;
    if (rows.empty()) {
      factors.assign(r, Int(0));
    } else {
      factors = smithNormalForm(rel).invariantFactors;
      while (factors.size() < r) factors.push_back(0);
    }
    return cleanedFactors(std::move(factors));
  }

  // Fixed-point certificates: every basis is stable under phi^{+-1},
  // conjugation by the fiber generators, and internal commutators.
  CertificateReport verifyClosureCertificates() const {
    CertificateReport rep;
    for (int n = 2; n <= cfg_.classCap; ++n) {
      const SiftedBasis& b = basis(n);
      auto expect = [&](const TruncSeries& s, const std::string& what) {
        ++rep.checked;
        if (!b.contains(s)) {
          ++rep.failures;
          rep.failureNotes.push_back("W_" + std::to_string(n) + ": " + what + " escapes the basis");
        }
      };
      const auto& elems = b.elements();
      for (size_t i = 0; i < elems.size(); ++i) {
        const TruncSeries& s = elems[i].series;
        expect(substitute(s, cfg_.group.phi().images()), "phi image");
        expect(substitute(s, cfg_.group.phi().inverseImages()), "phi^-1 image");
        for (int g = 0; g < rank(); ++g) {
          for (int sign : {1, -1}) {
            TruncSeries xg = expand(Word::generator(g, sign), rank(), seriesCap_);
            expect(seriesConjugate(s, xg), "conjugate");
          }
        }
        for (size_t j = i + 1; j < elems.size(); ++j) {
          if (s.minDegree() + elems[j].series.minDegree() > seriesCap_) continue;
          expect(seriesCommutator(s, elems[j].series), "internal commutator");
        }
      }
    }
    return rep;
  }

  // W_2 >= W_3 >= ... >= W_c.
  bool towerHolds() const {
    for (int n = 2; n < cfg_.classCap; ++n) {
      const SiftedBasis& lower = basis(n);
      for (const auto& e : basis(n + 1).elements())
        if (!lower.contains(e.series)) return false;
    }
    return true;
  }

  // gamma_n(F) <= W_n: every degree-n Hall bracket word sifts to identity.
  bool freeGammaContained(int upTo) const {
    for (int n = 2; n <= std::min(upTo, cfg_.classCap); ++n) {
      for (const HallElement& h : hallBasis(rank(), n, std::max(8, n))) {
        Word w = hallBracketWord(h.tree);
        if (!member(w, n)) return false;
      }
    }
    return true;
  }

  // Finite-class shadow of the limit-term identification: the candidate
  // commutator and its whole normal closure live in every W_n, while the
  // first generator already fails at class 2.
  GammaOmegaReport gammaOmegaReport() const {
    if (rank() < 2) throw std::invalid_argument("gammaOmegaReport: needs fiber rank >= 2");
    GammaOmegaReport rep;
    Word cand = commutator(Word::generator(0), Word::generator(1));
    rep.candidateInAllClasses = true;
    for (int n = 2; n <= cfg_.classCap; ++n) rep.candidateInAllClasses &= member(cand, n);
    int iters = 0;
    SiftedBasis closureBasis =
        closure({{expand(cand, rank(), seriesCap_), cand}}, &iters);
    rep.candidateClosureContained = true;
    for (int n = 2; n <= cfg_.classCap; ++n)
      for (const auto& e : closureBasis.elements())
        rep.candidateClosureContained &= basis(n).contains(e.series);
    rep.generatorOutsideGamma2 = !member(Word::generator(0), 2);
    MappingTorusHomology h = mappingTorusHomology(cfg_.group.abelianization());
    rep.h2PieceIsZ2 = h.h2CokerPiece == std::vector<Int>{Int(2)} && h.h2KernelRank == 0;
    return rep;
  }

  std::string dump() const {
    std::string out;
    for (int n = 2; n <= cfg_.classCap; ++n) {
      out += "W_" + std::to_string(n) + " (" + std::to_string(basis(n).size()) + " elements)\n";
      out += basis(n).dump(cfg_.group.fiberAlphabet());
    }
    return out;
  }

 private:
  using Seed = std::pair<TruncSeries, std::optional<Word>>;

  SiftedBasis closure(std::vector<Seed> batch, int* iterations) const {
    SiftedBasis b(rank(), seriesCap_);
    std::set<long> processed;
    std::vector<TruncSeries> genSeries;
    for (int g = 0; g < rank(); ++g)
      for (int sign : {1, -1}) genSeries.push_back(expand(Word::generator(g, sign), rank(), seriesCap_));
    int iter = 0;
    while (!batch.empty()) {
      ++iter;
      for (auto& [s, prov] : batch) b.insert(std::move(s), std::move(prov));
      batch.clear();
      std::vector<const SiftedBasis::Element*> fresh;
      for (const auto& e : b.elements())
        if (!processed.contains(e.id)) fresh.push_back(&e);
      std::sort(fresh.begin(), fresh.end(),
                [](const SiftedBasis::Element* a, const SiftedBasis::Element* c) { return a->id < c->id; });
      for (const SiftedBasis::Element* e : fresh) {
        processed.insert(e->id);
        batch.emplace_back(substitute(e->series, cfg_.group.phi().images()), phiProvenance(e->provenance, +1));
        batch.emplace_back(substitute(e->series, cfg_.group.phi().inverseImages()), phiProvenance(e->provenance, -1));
        for (size_t gi = 0; gi < genSeries.size(); ++gi) {
          Word conjWord = Word::generator(static_cast<int>(gi / 2), gi % 2 == 0 ? 1 : -1);
          std::optional<Word> prov;
          if (e->provenance) prov = conjugate(*e->provenance, conjWord);
          batch.emplace_back(seriesConjugate(e->series, genSeries[gi]), std::move(prov));
        }
        const int eDeg = e->series.minDegree();
        for (const auto& f : b.elements()) {
          if (f.id == e->id) continue;
          if (eDeg + f.series.minDegree() > seriesCap_) continue;
          std::optional<Word> prov;
          if (e->provenance && f.provenance) prov = commutator(*e->provenance, *f.provenance);
          batch.emplace_back(seriesCommutator(e->series, f.series), std::move(prov));
        }
      }
    }
    if (iterations) *iterations = iter;
    return b;
  }

  std::optional<Word> phiProvenance(const std::optional<Word>& w, int direction) const {
    if (!w) return std::nullopt;
    try {
      Word img = direction > 0 ? cfg_.group.phi().apply(*w) : cfg_.group.phi().applyInverse(*w);
      if (img.flatLength() > 512) return std::nullopt;
      return img;
    } catch (const resource_limit_error&) {
      return std::nullopt;
    }
  }

  void build() {
    const int r = rank();
    std::vector<Seed> gens;
    for (int i = 0; i < r; ++i)
      for (int j = i + 1; j < r; ++j) {
        Word w = commutator(Word::generator(i), Word::generator(j));
        gens.emplace_back(expand(w, r, seriesCap_), w);
      }
    for (int i = 0; i < r; ++i) {
      Word w = product(inverse(Word::generator(i)), cfg_.group.phi().images()[static_cast<size_t>(i)]);
      gens.emplace_back(expand(w, r, seriesCap_), w);
    }
    int iters = 0;
    bases_.push_back(closure(std::move(gens), &iters));
    stats_.iterations.push_back(iters);
    for (int n = 3; n <= cfg_.classCap; ++n) {
      const SiftedBasis& prev = bases_.back();
      std::vector<Seed> next;
      for (const auto& e : prev.elements()) {
        for (int i = 0; i < r; ++i) {
          TruncSeries xg = expand(Word::generator(i), r, seriesCap_);
          std::optional<Word> prov;
          if (e.provenance) prov = commutator(*e.provenance, Word::generator(i));
          next.emplace_back(seriesCommutator(e.series, xg), std::move(prov));
        }
        // g^-1 phi(g) = [g, t]
        TruncSeries tw = mul(inverseUnit(e.series), substitute(e.series, cfg_.group.phi().images()));
        std::optional<Word> prov;
        if (e.provenance) {
          try {
            Word img = cfg_.group.phi().apply(*e.provenance);
            Word w = product(inverse(*e.provenance), img);
            if (w.flatLength() <= 512) prov = w;
          } catch (const resource_limit_error&) {
          }
        }
        next.emplace_back(std::move(tw), std::move(prov));
      }
      int it2 = 0;
      bases_.push_back(closure(std::move(next), &it2));
      stats_.iterations.push_back(it2);
    }
    for (SiftedBasis& b : bases_) b.normalize();
  }

  EngineConfig cfg_;
  int seriesCap_;
  std::vector<SiftedBasis> bases_;
  ClosureStats stats_;
};

struct WitnessEntry {
  int k = 0;
  std::string word;
  int expectedWeight = 0;
  int computedBound = 0;
  bool exact = false;
  bool weightMatches = false;
  bool inFreeGamma = false;  // member of gamma_{k+2} of the free fiber group
};

// Nontriviality of the left-normed witnesses [[y,x],x,[y,x],...,[y,x]] with
// k appended copies: exact free-group weight 2k+3 by Magnus expansion.
inline std::vector<WitnessEntry> witnessReport(int kMax, int cap) {
  if (kMax < 0) throw std::invalid_argument("witnessReport: kMax must be >= 0");
  if (cap < 2 * kMax + 3)
    throw precision_error("witnessReport: cap " + std::to_string(cap) + " below required " +
                          std::to_string(2 * kMax + 3));
  Alphabet fib = Alphabet::fiber(2);
  Word x = Word::generator(0), y = Word::generator(1);
  Word yx = commutator(y, x);
  std::vector<WitnessEntry> out;
  for (int k = std::min(kMax, 0); k <= kMax; ++k) {
    std::vector<Word> items{yx, x};
    for (int i = 0; i < k; ++i) items.push_back(yx);
    Word w = leftNormed(std::span<const Word>(items.data(), items.size()));
    WitnessEntry entry;
    entry.k = k;
    entry.word = toString(w, fib);
    entry.expectedWeight = 2 * k + 3;
    WeightResult wr = weight(w, 2, cap);
    entry.computedBound = wr.bound;
    entry.exact = wr.exact;
    entry.weightMatches = wr.exact && wr.bound == entry.expectedWeight;
    entry.inFreeGamma = isInGamma(w, k + 2, 2, cap);
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace lcs
