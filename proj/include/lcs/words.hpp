#pragma once

#include <algorithm>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcs/numeric.hpp"

namespace lcs {

// Ranked alphabet of free-group generators.
class Alphabet {
 public:
  explicit Alphabet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) throw std::invalid_argument("Alphabet: rank must be >= 1");
    for (int i = 0; i < static_cast<int>(names_.size()); ++i) {
      if (names_[i].empty()) throw std::invalid_argument("Alphabet: empty generator name");
      if (!index_.emplace(names_[i], i).second)
        throw std::invalid_argument("Alphabet: duplicate generator name '" + names_[i] + "'");
    }
  }

  // Conventional fiber names: x, y for rank 2, else x1..xn.
  static Alphabet fiber(int rank) {
    if (rank == 1) return Alphabet({"x"});
    if (rank == 2) return Alphabet({"x", "y"});
    std::vector<std::string> names;
    for (int i = 1; i <= rank; ++i) names.push_back("x" + std::to_string(i));
    return Alphabet(std::move(names));
  }

  int rank() const { return static_cast<int>(names_.size()); }
  const std::string& name(int i) const {
    if (i < 0 || i >= rank()) throw std::invalid_argument("Alphabet: index out of range");
    return names_[static_cast<size_t>(i)];
  }
  std::optional<int> index(std::string_view s) const {
    auto it = index_.find(std::string(s));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool operator==(const Alphabet& o) const { return names_ == o.names_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, int> index_;
};

// One maximal run g^e of a reduced word; e is never zero.
struct Run {
  int gen = 0;
  Int exp = 0;
  bool operator==(const Run& o) const { return gen == o.gen && exp == o.exp; }
};

// Freely reduced word in run-length form: adjacent runs use distinct
// generators and no run has exponent zero. The empty word is the identity.
class Word {
 public:
  Word() = default;

  explicit Word(const std::vector<Run>& raw) {
    for (const Run& r : raw) append(r.gen, r.exp);
  }

  static Word generator(int gen, Int exp = 1) {
    Word w;
    w.append(gen, std::move(exp));
    return w;
  }

  const std::vector<Run>& runs() const { return runs_; }
  bool isIdentity() const { return runs_.empty(); }
  size_t runCount() const { return runs_.size(); }

  Int flatLength() const {
    Int n = 0;
    for (const Run& r : runs_) n += abs(r.exp);
    return n;
  }

  int maxGenIndex() const {
    int m = -1;
    for (const Run& r : runs_) m = std::max(m, r.gen);
    return m;
  }

  // Pushes g^e onto the right end, merging and cancelling as needed.
  void append(int gen, Int exp) {
    if (gen < 0) throw std::invalid_argument("Word: negative generator index");
    if (sgn(exp) == 0) return;
    if (!runs_.empty() && runs_.back().gen == gen) {
      runs_.back().exp += exp;
      if (sgn(runs_.back().exp) == 0) runs_.pop_back();
    } else {
      runs_.push_back(Run{gen, std::move(exp)});
    }
  }

  void appendWord(const Word& w) {
    for (const Run& r : w.runs_) append(r.gen, r.exp);
  }

  bool operator==(const Word& o) const { return runs_ == o.runs_; }
  bool operator!=(const Word& o) const { return !(*this == o); }

 private:
  std::vector<Run> runs_;
};

// Free reduction of a raw letter sequence; validates indices against rank.
inline Word reduce(const std::vector<Run>& raw, int rank) {
  for (const Run& r : raw)
    if (r.gen < 0 || r.gen >= rank)
      throw std::invalid_argument("reduce: generator index out of range");
  return Word(raw);
}

inline Word inverse(const Word& w) {
  Word r;
  const auto& rs = w.runs();
  for (auto it = rs.rbegin(); it != rs.rend(); ++it) r.append(it->gen, -it->exp);
  return r;
}

inline Word product(const Word& a, const Word& b) {
  Word r = a;
  r.appendWord(b);
  return r;
}

inline Word product(std::initializer_list<Word> ws) {
  Word r;
  for (const Word& w : ws) r.appendWord(w);
  return r;
}

// Cyclic reduction: returns the cyclically reduced core c with w = s c s^-1.
inline Word cyclicReduce(const Word& w, Word* conjugator = nullptr) {
  std::vector<Run> core(w.runs());
  std::vector<Run> prefix;
  while (core.size() >= 2 && core.front().gen == core.back().gen) {
    Run first = core.front(), last = core.back();
    Int combined = first.exp + last.exp;
    if (sgn(combined) == 0) {
      prefix.push_back(first);
      core.erase(core.begin());
      core.pop_back();
    } else {
      // w = g^{-last.exp} (g^{first.exp+last.exp} mid) g^{last.exp}
      prefix.push_back(Run{first.gen, -last.exp});
      core.erase(core.begin());
      core.pop_back();
      core.insert(core.begin(), Run{first.gen, combined});
      break;
    }
  }
  if (conjugator) *conjugator = Word(prefix);
  return Word(core);
}

// w^e. Uses the cyclic decomposition so single-run cores cost O(1) even for
// huge exponents; multi-run cores are materialized under a run budget.
inline Word pow(const Word& w, const Int& e, long runBudget = 1L << 22) {
  if (sgn(e) == 0 || w.isIdentity()) return Word();
  Word conj;
  Word core = cyclicReduce(w, &conj);
  Int k = abs(e);
  Word corePow;
  const Word base = sgn(e) > 0 ? core : inverse(core);
  if (base.runCount() == 1) {
    const Run& r = base.runs()[0];
    corePow = Word::generator(r.gen, r.exp * k);
  } else {
    Int totalRuns = k * static_cast<long>(base.runCount());
    if (totalRuns > runBudget)
      throw resource_limit_error("pow: materialized word would have " + toString(totalRuns) + " runs");
    long reps = toLong(k);
    for (long i = 0; i < reps; ++i) corePow.appendWord(base);
  }
  return product(product(conj, corePow), inverse(conj));
}

// v^-1 u v
inline Word conjugate(const Word& u, const Word& v) {
  return product(product(inverse(v), u), v);
}

// u^-1 v^-1 u v
inline Word commutator(const Word& u, const Word& v) {
  Word r = inverse(u);
  r.appendWord(inverse(v));
  r.appendWord(u);
  r.appendWord(v);
  return r;
}

// [w1, w2, ..., wk] = [[w1, ..., w_{k-1}], wk]
inline Word leftNormed(std::span<const Word> items) {
  if (items.size() < 2) throw std::invalid_argument("leftNormed: needs at least 2 words");
  Word acc = items[0];
  for (size_t i = 1; i < items.size(); ++i) acc = commutator(acc, items[i]);
  return acc;
}

inline Word leftNormed(std::initializer_list<Word> items) {
  return leftNormed(std::span<const Word>(items.begin(), items.size()));
}

struct ProperPower {
  Word root;
  Int exponent;  // maximal k >= 1 with cyclicReduce(w) = root^k
};

// Maximal-root decomposition of the cyclically reduced core. Periods are
// detected on runs, so flat lengths never need materializing.
inline ProperPower properPower(const Word& w) {
  if (w.isIdentity()) throw std::invalid_argument("properPower: empty word");
  Word core = cyclicReduce(w);
  const auto& rs = core.runs();
  const size_t m = rs.size();
  if (m == 1) {
    const Run& r = rs[0];
    return ProperPower{Word::generator(r.gen, sgn(r.exp) > 0 ? 1 : -1), abs(r.exp)};
  }
  for (size_t p = 1; p <= m; ++p) {
    if (m % p != 0) continue;
    bool periodic = true;
    for (size_t i = p; i < m && periodic; ++i) periodic = rs[i] == rs[i - p];
    if (periodic) {
      Word root(std::vector<Run>(rs.begin(), rs.begin() + static_cast<long>(p)));
      return ProperPower{root, Int(m / p)};
    }
  }
  return ProperPower{core, 1};  // p = m always succeeds; not reached
}

inline std::string toString(const Word& w, const Alphabet& a) {
  if (w.isIdentity()) return "1";
  std::string s;
  for (const Run& r : w.runs()) {
    if (!s.empty()) s += "*";
    s += a.name(r.gen);
    if (r.exp != 1) s += "^" + toString(r.exp);
  }
  return s;
}

namespace detail {

// Recursive-descent parser for the word literal grammar:
//   word   := term { ['*'] term }
//   term   := atom { '^' (int | atom) }     (left-associative)
//   atom   := ident | '1' | '(' word ')' | '[' word (',' word)+ ']'
class WordParser {
 public:
  WordParser(std::string_view s, const Alphabet& a) : s_(s), a_(a) {}

  Word parse() {
    Word w = parseWord();
    skipWs();
    if (pos_ != s_.size()) fail("trailing input");
    return w;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw std::invalid_argument("word parse error at offset " + std::to_string(pos_) + ": " + msg);
  }

  void skipWs() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool peekIs(char c) {
    skipWs();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  void expect(char c) {
    skipWs();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool atAtomStart() {
    skipWs();
    if (pos_ >= s_.size()) return false;
    char c = s_[pos_];
    return c == '(' || c == '[' || c == '1' || std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }

  Word parseWord() {
    skipWs();
    if (!atAtomStart()) fail("expected a word");
    Word acc = parseTerm();
    for (;;) {
      skipWs();
      if (peekIs('*')) {
        ++pos_;
        acc.appendWord(parseTerm());
      } else if (atAtomStart()) {
        acc.appendWord(parseTerm());
      } else {
        break;
      }
    }
    return acc;
  }

  Word parseTerm() {
    Word base = parseAtom();
    for (;;) {
      skipWs();
      if (!peekIs('^')) break;
      ++pos_;
      skipWs();
      if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+' || std::isdigit(static_cast<unsigned char>(s_[pos_])))) {
        base = pow(base, parseInt());
      } else {
        base = conjugate(base, parseAtom());
      }
    }
    return base;
  }

  Int parseInt() {
    skipWs();
    size_t start = pos_;
    if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
    size_t digits = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      ++pos_;
      ++digits;
    }
    if (digits == 0) fail("expected integer");
    return Int(std::string(s_.substr(start, pos_ - start)));
  }

  Word parseAtom() {
    skipWs();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Word w = parseWord();
      expect(')');
      return w;
    }
    if (c == '[') {
      ++pos_;
      std::vector<Word> items;
      items.push_back(parseWord());
      while (peekIs(',')) {
        ++pos_;
        items.push_back(parseWord());
      }
      expect(']');
      if (items.size() < 2) fail("commutator needs at least 2 entries");
      return leftNormed(std::span<const Word>(items.data(), items.size()));
    }
    if (c == '1') {
      ++pos_;
      return Word();
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      std::string name(s_.substr(start, pos_ - start));
      auto idx = a_.index(name);
      if (!idx) fail("unknown generator '" + name + "'");
      return Word::generator(*idx);
    }
    fail("unexpected character");
  }

  std::string_view s_;
  const Alphabet& a_;
  size_t pos_ = 0;
};

}  // namespace detail

inline Word parseWord(std::string_view s, const Alphabet& a) {
  return detail::WordParser(s, a).parse();
}

}  // namespace lcs
