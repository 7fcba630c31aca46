#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "lcs/latmod.hpp"
#include "lcs/magnus.hpp"
#include "lcs/numeric.hpp"
#include "lcs/words.hpp"

namespace lcs {

inline int mobius(int n) {
  int result = 1;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      n /= p;
      if (n % p == 0) return 0;
      result = -result;
    }
  }
  if (n > 1) result = -result;
  return result;
}

// Rank of the degree-n component of the free Lie ring on r generators:
// (1/n) sum_{d | n} mu(d) r^{n/d}.
inline Int wittDimensionInt(int r, int n) {
  if (r < 1 || n < 1) throw std::invalid_argument("wittDimension: r and n must be >= 1");
  Int sum = 0;
  for (int d = 1; d <= n; ++d) {
    if (n % d != 0) continue;
    int mu = mobius(d);
    if (mu == 0) continue;
    sum += Int(mu) * intPow(Int(r), static_cast<unsigned long>(n / d));
  }
  return exactDiv(sum, Int(n));
}

inline long wittDimension(int r, int n) { return toLong(wittDimensionInt(r, n)); }

// All Lyndon words of length exactly n over {0..r-1}, in lex order (Duval).
inline std::vector<std::vector<int>> lyndonWords(int r, int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> w{0};
  for (;;) {
    if (static_cast<int>(w.size()) == n) out.push_back(w);
    // periodic extension to length n, then increment the last non-maximal letter
    size_t base = w.size();
    while (static_cast<int>(w.size()) < n) w.push_back(w[w.size() % base]);
    while (!w.empty() && w.back() == r - 1) w.pop_back();
    if (w.empty()) break;
    ++w.back();
  }
  return out;
}

// A bracket tree over generator leaves; canonical means it is the standard
// (Lyndon) bracketing of its foliage.
struct HallElement {
  struct Node {
    int leaf = -1;
    std::shared_ptr<const Node> left, right;
  };
  using NodePtr = std::shared_ptr<const Node>;

  NodePtr tree;
  std::vector<int> foliage;
  bool canonical = true;

  int degree() const { return static_cast<int>(foliage.size()); }
};

namespace detail {

inline HallElement::NodePtr leafNode(int g) {
  auto n = std::make_shared<HallElement::Node>();
  n->leaf = g;
  return n;
}

inline HallElement::NodePtr bracketNode(HallElement::NodePtr l, HallElement::NodePtr r) {
  auto n = std::make_shared<HallElement::Node>();
  n->left = std::move(l);
  n->right = std::move(r);
  return n;
}

// Standard bracketing of a Lyndon word: split at the lexicographically
// smallest proper suffix.
inline HallElement::NodePtr standardBracketing(const std::vector<int>& w,
                                               std::map<std::vector<int>, HallElement::NodePtr>& memo) {
  if (w.size() == 1) return leafNode(w[0]);
  auto it = memo.find(w);
  if (it != memo.end()) return it->second;
  size_t split = 1;
  std::vector<int> best(w.begin() + 1, w.end());
  for (size_t s = 2; s < w.size(); ++s) {
    std::vector<int> suffix(w.begin() + static_cast<long>(s), w.end());
    if (suffix < best) {
      best = std::move(suffix);
      split = s;
    }
  }
  std::vector<int> left(w.begin(), w.begin() + static_cast<long>(split));
  auto node = bracketNode(standardBracketing(left, memo), standardBracketing(best, memo));
  memo.emplace(w, node);
  return node;
}

}  // namespace detail

// Canonical basis of L^n(Z^r): standard bracketings of the degree-n Lyndon
// words, in lex order of foliage. Memoized; degrees above the cap refused.
inline const std::vector<HallElement>& hallBasis(int r, int n, int degreeCap = 8) {
  if (n > degreeCap)
    throw resource_limit_error("hallBasis: degree " + std::to_string(n) + " above cap " + std::to_string(degreeCap));
  if (r < 1 || n < 1) throw std::invalid_argument("hallBasis: r and n must be >= 1");
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::vector<HallElement>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(r, n);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<HallElement> basis;
  std::map<std::vector<int>, HallElement::NodePtr> memo;
  for (auto& w : lyndonWords(r, n)) {
    HallElement h;
    h.tree = detail::standardBracketing(w, memo);
    h.foliage = std::move(w);
    basis.push_back(std::move(h));
  }
  return cache.emplace(key, std::move(basis)).first->second;
}

inline std::string bracketString(const HallElement::NodePtr& node, const Alphabet& a) {
  if (node->leaf >= 0) return a.name(node->leaf);
  return "[" + bracketString(node->left, a) + "," + bracketString(node->right, a) + "]";
}

// The group word realizing a bracket tree with commutators.
inline Word hallBracketWord(const HallElement::NodePtr& node) {
  if (node->leaf >= 0) return Word::generator(node->leaf);
  return commutator(hallBracketWord(node->left), hallBracketWord(node->right));
}

namespace detail {

// Concatenation product of homogeneous tensor components.
inline IntVec tensorConv(const IntVec& u, const IntVec& v) {
  IntVec out = IntVec::Zero(u.size() * v.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (sgn(u(i)) == 0) continue;
    for (Eigen::Index j = 0; j < v.size(); ++j)
      if (sgn(v(j)) != 0) out(i * v.size() + j) = u(i) * v(j);
  }
  return out;
}

// Associative expansion of a bracket tree, with each leaf g replaced by the
// degree-1 vector leaves[g].
inline IntVec assocExpansion(const HallElement::NodePtr& node, const std::vector<IntVec>& leaves) {
  if (node->leaf >= 0) return leaves[static_cast<size_t>(node->leaf)];
  IntVec u = assocExpansion(node->left, leaves);
  IntVec v = assocExpansion(node->right, leaves);
  IntVec uv = tensorConv(u, v);
  IntVec vu = tensorConv(v, u);
  return uv - vu;
}

struct LyndonTable {
  std::vector<IntVec> expansions;          // associative expansion per basis element
  std::map<long, int> indexToBasis;        // monomial index of foliage -> basis position
};

inline const LyndonTable& lyndonTable(int r, int n, int degreeCap) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, LyndonTable> cache;
  const auto& basis = hallBasis(r, n, degreeCap);
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(r, n);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<IntVec> unitLeaves;
  for (int g = 0; g < r; ++g) {
    IntVec e = IntVec::Zero(r);
    e(g) = 1;
    unitLeaves.push_back(std::move(e));
  }
  LyndonTable table;
  for (int pos = 0; pos < static_cast<int>(basis.size()); ++pos) {
    const HallElement& h = basis[static_cast<size_t>(pos)];
    table.expansions.push_back(assocExpansion(h.tree, unitLeaves));
    long idx = monomialIndex(h.foliage, r);
    if (table.expansions.back()(idx) != 1)
      throw std::logic_error("lyndonTable: expansion is not unitriangular");
    table.indexToBasis.emplace(idx, pos);
  }
  return cache.emplace(key, std::move(table)).first->second;
}

}  // namespace detail

// Coordinates of a degree-n Lie element (given by its associative tensor
// vector) in the Lyndon basis. The expansion of the basis bracket of w is
// w + (lex-greater words), so greedy elimination at the lex-least word is
// exact.
inline IntVec hallCoordinates(int r, int n, IntVec tensor, int degreeCap = 8) {
  const auto& table = detail::lyndonTable(r, n, degreeCap);
  IntVec coords = IntVec::Zero(static_cast<Eigen::Index>(table.expansions.size()));
  for (;;) {
    Eigen::Index first = -1;
    for (Eigen::Index i = 0; i < tensor.size(); ++i)
      if (sgn(tensor(i)) != 0) {
        first = i;
        break;
      }
    if (first < 0) break;
    auto it = table.indexToBasis.find(first);
    if (it == table.indexToBasis.end())
      throw std::invalid_argument("hallCoordinates: vector is not a Lie element (leading word not Lyndon)");
    const Int c = tensor(first);
    coords(it->second) += c;
    tensor -= table.expansions[static_cast<size_t>(it->second)] * c;
  }
  return coords;
}

struct LiePowerMatrix {
  int degree = 1;
  long dimension = 0;
  IntMat matrix;
};

// Matrix induced on L^n(Z^r) in Hall-basis coordinates by x_i -> sum_j A_ji x_j.
// Functorial in A.
inline LiePowerMatrix liePowerMatrix(const IntMat& a, int n, int degreeCap = 8) {
  if (a.rows() != a.cols()) throw std::invalid_argument("liePowerMatrix: matrix not square");
  const int r = static_cast<int>(a.rows());
  if (n == 1) return LiePowerMatrix{1, r, a};
  const auto& basis = hallBasis(r, n, degreeCap);
  const long dim = wittDimension(r, n);
  if (static_cast<long>(basis.size()) != dim)
    throw std::logic_error("liePowerMatrix: Hall basis size disagrees with the Witt formula");
  std::vector<IntVec> leafImages;
  for (int g = 0; g < r; ++g) leafImages.push_back(a.col(g));
  IntMat m(dim, dim);
  for (long col = 0; col < dim; ++col) {
    IntVec tensor = detail::assocExpansion(basis[static_cast<size_t>(col)].tree, leafImages);
    m.col(col) = hallCoordinates(r, n, std::move(tensor), degreeCap);
  }
  return LiePowerMatrix{n, dim, std::move(m)};
}

}  // namespace lcs
