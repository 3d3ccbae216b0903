// Words in free products of free groups: the letters carry an alphabet tag,
// so one Word type covers tape words, state words and mixed admissible words.
#ifndef SMW_WORD_HPP
#define SMW_WORD_HPP

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <deque>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace smw {

// ---------------------------------------------------------------------------
// Interned names. Ids are process-local and must never be used for ordering
// or serialization; canonical order is always by the underlying strings.
// ---------------------------------------------------------------------------

namespace detail {

struct NamePool {
  std::deque<std::string> strs;  // deque: references stay valid on growth
  std::unordered_map<std::string_view, std::uint32_t> ids;
  std::mutex mu;

  static NamePool& get() {
    static NamePool pool;
    return pool;
  }
};

}  // namespace detail

inline std::uint32_t intern(std::string_view s) {
  auto& pool = detail::NamePool::get();
  std::lock_guard<std::mutex> lock(pool.mu);
  auto it = pool.ids.find(s);
  if (it != pool.ids.end()) return it->second;
  pool.strs.emplace_back(s);
  std::uint32_t id = static_cast<std::uint32_t>(pool.strs.size() - 1);
  pool.ids.emplace(pool.strs.back(), id);
  return id;
}

inline const std::string& name_of(std::uint32_t id) {
  auto& pool = detail::NamePool::get();
  std::lock_guard<std::mutex> lock(pool.mu);
  return pool.strs.at(id);
}

// ---------------------------------------------------------------------------
// Letters and words
// ---------------------------------------------------------------------------

struct Letter {
  std::uint32_t alph;  // interned alphabet name
  std::uint32_t sym;   // interned letter name
  int exp;             // +1 or -1

  friend bool operator==(const Letter&, const Letter&) = default;

  Letter inv() const { return Letter{alph, sym, -exp}; }
  bool cancels(const Letter& o) const {
    return alph == o.alph && sym == o.sym && exp == -o.exp;
  }
};

// Canonical order: by names, not ids, so results do not depend on intern order.
inline bool letter_less(const Letter& a, const Letter& b) {
  const std::string& aa = name_of(a.alph);
  const std::string& ba = name_of(b.alph);
  if (aa != ba) return aa < ba;
  const std::string& as = name_of(a.sym);
  const std::string& bs = name_of(b.sym);
  if (as != bs) return as < bs;
  return a.exp < b.exp;
}

using Word = std::vector<Letter>;

inline std::size_t norm(const Word& w) { return w.size(); }

inline Word inverse(const Word& w) {
  Word r;
  r.reserve(w.size());
  for (auto it = w.rbegin(); it != w.rend(); ++it) r.push_back(it->inv());
  return r;
}

inline Word concat(const Word& a, const Word& b) {
  Word r = a;
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

// Free reduction by the usual stack scan.
inline Word reduce(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (const Letter& l : w) {
    if (!out.empty() && out.back().cancels(l)) {
      out.pop_back();
    } else {
      out.push_back(l);
    }
  }
  return out;
}

inline bool is_reduced(const Word& w) {
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    if (w[i].cancels(w[i + 1])) return false;
  }
  return true;
}

inline Word cyclic_reduce(const Word& w) {
  Word r = reduce(w);
  std::size_t lo = 0, hi = r.size();
  while (hi - lo >= 2 && r[lo].cancels(r[hi - 1])) {
    ++lo;
    --hi;
  }
  return Word(r.begin() + lo, r.begin() + hi);
}

inline bool is_cyclically_reduced(const Word& w) {
  if (!is_reduced(w)) return false;
  return w.size() < 2 || !w.front().cancels(w.back());
}

inline Word rotate(const Word& w, std::size_t k) {
  if (w.empty()) return w;
  k %= w.size();
  Word r(w.begin() + k, w.end());
  r.insert(r.end(), w.begin(), w.begin() + k);
  return r;
}

inline std::size_t count_alph(const Word& w, std::uint32_t alph) {
  std::size_t n = 0;
  for (const Letter& l : w)
    if (l.alph == alph) ++n;
  return n;
}

// ---------------------------------------------------------------------------
// Alphabets and letter maps
// ---------------------------------------------------------------------------

struct Alphabet {
  std::uint32_t name;
  std::vector<std::uint32_t> letters;  // canonical order of the alphabet

  Alphabet() : name(intern("")) {}  // unset marker: the empty name
  Alphabet(std::string_view alph_name, const std::vector<std::string>& ls) {
    name = intern(alph_name);
    letters.reserve(ls.size());
    for (const auto& l : ls) letters.push_back(intern(l));
  }

  std::size_t size() const { return letters.size(); }
  bool contains(std::uint32_t sym) const {
    return std::find(letters.begin(), letters.end(), sym) != letters.end();
  }
  Letter at(std::size_t i, int exp = 1) const { return Letter{name, letters.at(i), exp}; }
};

namespace detail {
inline std::uint64_t sym_key(std::uint32_t alph, std::uint32_t sym) {
  return (static_cast<std::uint64_t>(alph) << 32) | sym;
}
}  // namespace detail

// A bijection between alphabets, applied letterwise with exponents kept.
struct LetterMap {
  std::unordered_map<std::uint64_t, std::pair<std::uint32_t, std::uint32_t>> map;

  void add(const Alphabet& from, const Alphabet& to) {
    if (from.size() != to.size())
      throw std::runtime_error("letter map: alphabet sizes differ");
    for (std::size_t i = 0; i < from.size(); ++i)
      map[detail::sym_key(from.name, from.letters[i])] = {to.name, to.letters[i]};
  }

  bool defined(const Letter& l) const {
    return map.count(detail::sym_key(l.alph, l.sym)) != 0;
  }

  Letter operator()(const Letter& l) const {
    auto it = map.find(detail::sym_key(l.alph, l.sym));
    if (it == map.end())
      throw std::runtime_error("letter map: unmapped letter " + name_of(l.alph) + ":" +
                               name_of(l.sym));
    return Letter{it->second.first, it->second.second, l.exp};
  }
};

// Copy of a word under an alphabet bijection.
inline Word copy_word(const Word& w, const LetterMap& m) {
  Word r;
  r.reserve(w.size());
  for (const Letter& l : w) r.push_back(m(l));
  return r;
}

// Bar projection: delete the letters of one alphabet (counting them) and map
// the rest through the given bijection. The image is returned unreduced.
struct BarImage {
  Word word;
  std::size_t dropped = 0;
};

inline BarImage project_bar(const Word& v, const LetterMap& m, std::uint32_t drop_alph) {
  BarImage out;
  for (const Letter& l : v) {
    if (l.alph == drop_alph) {
      ++out.dropped;
    } else {
      out.word.push_back(m(l));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Token serialization: "alph:letter" or "alph:letter^-1", whitespace-joined.
// The empty word prints as "1" (and "" parses back to it as well).
// ---------------------------------------------------------------------------

inline void check_name(std::string_view s) {
  if (s.empty()) throw std::runtime_error("empty name");
  for (char c : s) {
    if (c == ':' || c == '^' || c == ' ' || c == '\t' || c == '\n')
      throw std::runtime_error("bad character in name: " + std::string(s));
  }
}

inline std::string to_token(const Letter& l) {
  std::string s = name_of(l.alph) + ":" + name_of(l.sym);
  if (l.exp < 0) s += "^-1";
  return s;
}

inline std::string to_string(const Word& w) {
  if (w.empty()) return "1";
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += ' ';
    s += to_token(w[i]);
  }
  return s;
}

inline Letter parse_token(std::string_view tok) {
  int exp = 1;
  if (tok.size() >= 3 && tok.substr(tok.size() - 3) == "^-1") {
    exp = -1;
    tok = tok.substr(0, tok.size() - 3);
  } else if (tok.size() >= 2 && tok.substr(tok.size() - 2) == "^1") {
    tok = tok.substr(0, tok.size() - 2);
  }
  auto colon = tok.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.size())
    throw std::runtime_error("bad letter token: " + std::string(tok));
  std::string_view alph = tok.substr(0, colon);
  std::string_view sym = tok.substr(colon + 1);
  check_name(alph);
  check_name(sym);
  return Letter{intern(alph), intern(sym), exp};
}

inline Word parse_word(std::string_view text) {
  Word w;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      std::string_view tok = text.substr(i, j - i);
      if (tok != "1") w.push_back(parse_token(tok));
    }
    i = j;
  }
  return w;
}

// Convenience for building words in one alphabet from short specs like
// "y1 y2^-1 y1". Used all over the tests.
inline Word word_in(const Alphabet& a, std::string_view text) {
  Word w;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      std::string_view tok = text.substr(i, j - i);
      if (tok != "1") {
        int exp = 1;
        if (tok.size() >= 3 && tok.substr(tok.size() - 3) == "^-1") {
          exp = -1;
          tok = tok.substr(0, tok.size() - 3);
        }
        std::uint32_t sym = intern(tok);
        if (!a.contains(sym))
          throw std::runtime_error("letter not in alphabet: " + std::string(tok));
        w.push_back(Letter{a.name, sym, exp});
      }
    }
    i = j;
  }
  return w;
}

// Hash for unordered containers keyed by words (never serialized, ids are fine).
struct WordHash {
  std::size_t operator()(const Word& w) const {
    std::size_t h = 1469598103934665603ull;
    for (const Letter& l : w) {
      std::uint64_t k = (static_cast<std::uint64_t>(l.alph) << 33) ^
                        (static_cast<std::uint64_t>(l.sym) << 1) ^
                        static_cast<std::uint64_t>(l.exp > 0 ? 1 : 0);
      h ^= k;
      h *= 1099511628211ull;
    }
    return h;
  }
};

}  // namespace smw

#endif
