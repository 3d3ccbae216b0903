// S-machines: hardware, admissible words, rules, rule application, runs.
//
// Indexing conventions used throughout:
//   parts 0..N; sector j sits between parts j-1 and j and carries tape
//   alphabet tapes[j], so valid sectors are 1..N for a linear machine.
//   Cyclic machines have one more sector between part N and part 0; it is
//   indexed 0 and its tape lives in tapes[0] (unused slot for linear ones).
//   A rule part "q_i -> w q_i' w'" has left word w in sector i (appended on
//   the right of that sector's tape word) and right word w' in sector i+1
//   (prepended on the left), so applying a rule sends sector word u to
//   right(i-1) u left(i).
#ifndef SMW_MACHINE_HPP
#define SMW_MACHINE_HPP

#include <optional>

#include "smw/word.hpp"

namespace smw {

struct Part {
  Alphabet letters;
  std::optional<std::uint32_t> start;  // interned letter names
  std::optional<std::uint32_t> end;
};

struct SectorDomain {
  enum Kind { Full, Locked, Subset } kind = Full;
  std::vector<std::uint32_t> letters;  // only for Subset

  bool allows(std::uint32_t sym) const {
    switch (kind) {
      case Full: return true;
      case Locked: return false;
      case Subset:
        return std::find(letters.begin(), letters.end(), sym) != letters.end();
    }
    return false;
  }
  bool locked() const { return kind == Locked; }
};

struct RulePart {
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  Word left;   // in the sector left of this part
  Word right;  // in the sector right of this part
};

struct Rule {
  std::string name;
  std::string step;  // submachine tag for step histories; may be empty
  int branch = 0;    // two-branch machines tag rules 1 or 2; 0 means none
  std::vector<RulePart> parts;      // one per part
  std::vector<SectorDomain> domains;  // one per sector slot, domains[0] = wraparound
};

// A rule with an exponent; exp -1 is the inverse rule.
struct SignedRule {
  std::size_t index = 0;
  int exp = 1;

  friend bool operator==(const SignedRule&, const SignedRule&) = default;
  SignedRule inv() const { return SignedRule{index, -exp}; }
};

using History = std::vector<SignedRule>;

inline bool history_reduced(const History& h) {
  for (std::size_t i = 0; i + 1 < h.size(); ++i)
    if (h[i].index == h[i + 1].index && h[i].exp == -h[i + 1].exp) return false;
  return true;
}

inline History history_inverse(const History& h) {
  History r;
  r.reserve(h.size());
  for (auto it = h.rbegin(); it != h.rend(); ++it) r.push_back(it->inv());
  return r;
}

struct Machine {
  std::string name;
  bool cyclic = false;
  std::vector<Part> parts;
  std::vector<Alphabet> tapes;  // tapes[j] for sector j; slot 0 only for cyclic
  std::vector<std::size_t> input_sectors;
  std::vector<Rule> rules;  // positive rules; negatives are signed views

  // resolution caches, rebuilt by finalize()
  std::unordered_map<std::uint32_t, std::size_t> part_by_alph;
  std::unordered_map<std::uint32_t, std::size_t> sector_by_alph;

  std::size_t num_parts() const { return parts.size(); }
  // number of sector slots; slot 0 is only meaningful when cyclic
  std::size_t num_slots() const { return parts.size(); }
  bool valid_sector(std::size_t j) const {
    return j < num_slots() && (cyclic || j >= 1);
  }

  const Alphabet& tape(std::size_t j) const { return tapes.at(j); }

  bool is_state_alph(std::uint32_t a) const { return part_by_alph.count(a) != 0; }
  bool is_tape_alph(std::uint32_t a) const { return sector_by_alph.count(a) != 0; }

  bool is_input_sector(std::size_t j) const {
    return std::find(input_sectors.begin(), input_sectors.end(), j) != input_sectors.end();
  }

  void finalize() {
    part_by_alph.clear();
    sector_by_alph.clear();
    if (tapes.size() != parts.size())
      throw std::runtime_error(name + ": need one tape slot per part");
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (!part_by_alph.emplace(parts[i].letters.name, i).second)
        throw std::runtime_error(name + ": duplicate part name");
    }
    for (std::size_t j = 0; j < tapes.size(); ++j) {
      if (!valid_sector(j)) continue;
      if (part_by_alph.count(tapes[j].name) ||
          !sector_by_alph.emplace(tapes[j].name, j).second)
        throw std::runtime_error(name + ": tape alphabet name clash");
    }
    for (const auto& p : parts) {
      if (p.start && !p.letters.contains(*p.start))
        throw std::runtime_error(name + ": start letter outside part");
      if (p.end && !p.letters.contains(*p.end))
        throw std::runtime_error(name + ": end letter outside part");
    }
    for (std::size_t j : input_sectors)
      if (!valid_sector(j)) throw std::runtime_error(name + ": bad input sector");
    for (const auto& r : rules) validate_rule(r);
  }

  void validate_rule(const Rule& r) const {
    if (r.parts.size() != parts.size() || r.domains.size() != num_slots())
      throw std::runtime_error(name + "/" + r.name + ": wrong part or domain count");
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const RulePart& rp = r.parts[i];
      if (!parts[i].letters.contains(rp.from) || !parts[i].letters.contains(rp.to))
        throw std::runtime_error(name + "/" + r.name + ": state letter outside part");
      // left word of part i lies in sector i, right word in sector i+1
      check_rule_word(r, rp.left, i);
      check_rule_word(r, rp.right, (i + 1) % num_slots());
      if (rp.left.size() > 1 || rp.right.size() > 1)
        throw std::runtime_error(name + "/" + r.name + ": rule words longer than one letter");
    }
    for (std::size_t j = 0; j < num_slots(); ++j) {
      if (!valid_sector(j)) continue;
      if (r.domains[j].kind == SectorDomain::Subset)
        for (std::uint32_t s : r.domains[j].letters)
          if (!tapes[j].contains(s))
            throw std::runtime_error(name + "/" + r.name + ": domain letter outside tape");
    }
  }

  void check_rule_word(const Rule& r, const Word& w, std::size_t sector) const {
    if (w.empty()) return;
    if (!valid_sector(sector))
      throw std::runtime_error(name + "/" + r.name + ": rule word in nonexistent sector");
    for (const Letter& l : w) {
      if (l.alph != tapes[sector].name || !tapes[sector].contains(l.sym))
        throw std::runtime_error(name + "/" + r.name + ": rule word letter outside sector tape");
      if (!r.domains[sector].allows(l.sym))
        throw std::runtime_error(name + "/" + r.name + ": rule word letter outside domain");
    }
  }

  // signed view of a rule part: the inverse rule swaps from/to and inverts
  // the multiplier words in place (same sectors)
  RulePart rule_part(const SignedRule& sr, std::size_t i) const {
    const RulePart& rp = rules.at(sr.index).parts.at(i);
    if (sr.exp > 0) return rp;
    return RulePart{rp.to, rp.from, inverse(rp.left), inverse(rp.right)};
  }
  const SectorDomain& rule_domain(const SignedRule& sr, std::size_t j) const {
    return rules.at(sr.index).domains.at(j);
  }
  const Rule& rule_of(const SignedRule& sr) const { return rules.at(sr.index); }

  std::optional<std::size_t> find_rule(std::string_view rule_name) const {
    for (std::size_t i = 0; i < rules.size(); ++i)
      if (rules[i].name == rule_name) return i;
    return std::nullopt;
  }

  Letter state(std::size_t part, std::uint32_t sym, int exp = 1) const {
    if (!parts.at(part).letters.contains(sym))
      throw std::runtime_error("state letter outside part");
    return Letter{parts[part].letters.name, sym, exp};
  }
  Letter state(std::size_t part, std::string_view sym, int exp = 1) const {
    return state(part, intern(sym), exp);
  }
};

// ---------------------------------------------------------------------------
// Bases
// ---------------------------------------------------------------------------

struct BaseLetter {
  std::size_t part = 0;
  int exp = 1;
  friend bool operator==(const BaseLetter&, const BaseLetter&) = default;
};

using Base = std::vector<BaseLetter>;

inline Base standard_base(const Machine& m) {
  Base b;
  for (std::size_t i = 0; i < m.num_parts(); ++i) b.push_back(BaseLetter{i, 1});
  return b;
}

inline Base base_inverse(const Base& b) {
  Base r;
  for (auto it = b.rbegin(); it != b.rend(); ++it) r.push_back(BaseLetter{it->part, -it->exp});
  return r;
}

inline bool base_reduced(const Base& b) {
  for (std::size_t i = 0; i + 1 < b.size(); ++i)
    if (b[i].part == b[i + 1].part && b[i].exp == -b[i + 1].exp) return false;
  return true;
}

inline std::string base_to_string(const Machine& m, const Base& b) {
  std::string s;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (i) s += ' ';
    s += name_of(m.parts[b[i].part].letters.name);
    if (b[i].exp < 0) s += "^-1";
  }
  return s;
}

enum class BaseClass {
  Standard,
  FullFaulty,
  FullQ0,     // starts with part 0 positive, ends with its inverse
  FullQN,     // starts with part N inverted, ends with part N positive
  Revolving,  // cyclic machines only
  FaultyCyclic,
  Other,
};

inline const char* to_string(BaseClass c) {
  switch (c) {
    case BaseClass::Standard: return "standard";
    case BaseClass::FullFaulty: return "full-faulty";
    case BaseClass::FullQ0: return "full-q0";
    case BaseClass::FullQN: return "full-qn";
    case BaseClass::Revolving: return "revolving";
    case BaseClass::FaultyCyclic: return "faulty";
    case BaseClass::Other: return "other";
  }
  return "other";
}

namespace detail {

// first and last letter equal (as signed letters) and no other repeated pair;
// any repeated pair inside would give a smaller subword with equal ends
inline bool base_minimal_xvx(const Base& b) {
  std::size_t n = b.size();
  if (n < 2 || !(b.front() == b.back())) return false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (b[i] == b[j]) return false;
    }
  return true;
}

inline bool base_all_distinct(const Base& b) {
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = i + 1; j < b.size(); ++j)
      if (b[i] == b[j]) return false;
  return true;
}

}  // namespace detail

inline BaseClass classify_base(const Machine& m, const Base& b) {
  Base std_base = standard_base(m);
  if (b == std_base || base_inverse(b) == std_base) return BaseClass::Standard;
  if (m.cyclic) {
    if (detail::base_minimal_xvx(b))
      return base_reduced(b) ? BaseClass::Revolving : BaseClass::FaultyCyclic;
    return BaseClass::Other;
  }
  if (detail::base_minimal_xvx(b)) return BaseClass::FullFaulty;
  std::size_t N = m.num_parts() - 1;
  if (b.size() >= 2 && b.front() == BaseLetter{0, 1} && b.back() == BaseLetter{0, -1} &&
      detail::base_all_distinct(b))
    return BaseClass::FullQ0;
  if (b.size() >= 2 && b.front() == BaseLetter{N, -1} && b.back() == BaseLetter{N, 1} &&
      detail::base_all_distinct(b))
    return BaseClass::FullQN;
  return BaseClass::Other;
}

inline bool base_is_full(BaseClass c) {
  return c == BaseClass::Standard || c == BaseClass::FullFaulty || c == BaseClass::FullQ0 ||
         c == BaseClass::FullQN;
}

// ---------------------------------------------------------------------------
// Admissible words
// ---------------------------------------------------------------------------

struct AdmissibleWord {
  std::vector<Letter> states;        // signed state letters, in order
  std::vector<Word> gaps;            // gaps[k] between states[k] and states[k+1]
  std::vector<std::size_t> part_idx;  // part of states[k]
  std::vector<std::size_t> sector;    // sector of gaps[k]

  friend bool operator==(const AdmissibleWord& a, const AdmissibleWord& b) {
    return a.states == b.states && a.gaps == b.gaps;
  }

  Base base() const {
    Base b;
    b.reserve(states.size());
    for (std::size_t k = 0; k < states.size(); ++k)
      b.push_back(BaseLetter{part_idx[k], states[k].exp});
    return b;
  }

  std::size_t a_length() const {
    std::size_t n = 0;
    for (const Word& g : gaps) n += g.size();
    return n;
  }
  std::size_t q_length() const { return states.size(); }

  Word flatten() const {
    Word w;
    for (std::size_t k = 0; k < states.size(); ++k) {
      w.push_back(states[k]);
      if (k < gaps.size()) w.insert(w.end(), gaps[k].begin(), gaps[k].end());
    }
    return w;
  }
};

inline std::string to_string(const AdmissibleWord& w) { return to_string(w.flatten()); }

// Determine the sector between two adjacent signed state letters, following
// the three admissible-sector forms. Returns nullopt if no form matches.
inline std::optional<std::size_t> sector_between(const Machine& m, std::size_t part_a, int exp_a,
                                                 std::size_t part_b, int exp_b) {
  std::size_t P = m.num_parts();
  auto ok = [&](std::size_t j) -> std::optional<std::size_t> {
    if (m.valid_sector(j)) return j;
    return std::nullopt;
  };
  if (exp_a > 0 && exp_b > 0) {
    if ((part_a + 1) % P == part_b) return ok((part_a + 1) % P);
    return std::nullopt;
  }
  if (exp_a < 0 && exp_b < 0) {
    if ((part_b + 1) % P == part_a) return ok(part_a % P);
    return std::nullopt;
  }
  if (exp_a > 0 && exp_b < 0) {
    if (part_a == part_b) return ok((part_a + 1) % P);
    return std::nullopt;
  }
  // exp_a < 0, exp_b > 0
  if (part_a == part_b) return ok(part_a);
  return std::nullopt;
}

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline AdmissibleWord parse_admissible(const Machine& m, const Word& flat) {
  if (flat.empty()) throw ParseError("admissible word is empty");
  if (!is_reduced(flat)) throw ParseError("admissible word is not reduced");
  AdmissibleWord w;
  std::size_t k = 0;
  while (k < flat.size()) {
    const Letter& q = flat[k];
    auto pit = m.part_by_alph.find(q.alph);
    if (pit == m.part_by_alph.end())
      throw ParseError("expected a state letter, got " + to_token(q));
    if (!m.parts[pit->second].letters.contains(q.sym))
      throw ParseError("state letter outside its part: " + to_token(q));
    w.states.push_back(q);
    w.part_idx.push_back(pit->second);
    ++k;
    if (k == flat.size()) break;
    Word gap;
    while (k < flat.size() && !m.is_state_alph(flat[k].alph)) {
      gap.push_back(flat[k]);
      ++k;
    }
    if (k == flat.size()) {
      if (!gap.empty()) throw ParseError("admissible word must end with a state letter");
      break;
    }
    w.gaps.push_back(std::move(gap));
  }
  // resolve sectors and check the gap letters lie on the right tape
  for (std::size_t i = 0; i + 1 < w.states.size(); ++i) {
    auto s = sector_between(m, w.part_idx[i], w.states[i].exp, w.part_idx[i + 1],
                            w.states[i + 1].exp);
    if (!s)
      throw ParseError("no admissible sector between " + to_token(w.states[i]) + " and " +
                       to_token(w.states[i + 1]));
    w.sector.push_back(*s);
    for (const Letter& l : w.gaps[i]) {
      if (l.alph != m.tapes[*s].name || !m.tapes[*s].contains(l.sym))
        throw ParseError("tape letter " + to_token(l) + " outside sector " +
                         std::to_string(*s));
    }
  }
  return w;
}

inline AdmissibleWord parse_admissible(const Machine& m, std::string_view text) {
  return parse_admissible(m, parse_word(text));
}

// Count tape letters lying in input-sector alphabets (|W|_I); |W|_NI is
// a_length() minus this.
inline std::size_t input_length(const Machine& m, const AdmissibleWord& w) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < w.gaps.size(); ++i)
    if (m.is_input_sector(w.sector[i])) n += w.gaps[i].size();
  return n;
}
inline std::size_t noninput_length(const Machine& m, const AdmissibleWord& w) {
  return w.a_length() - input_length(m, w);
}

// ---------------------------------------------------------------------------
// Rule application
// ---------------------------------------------------------------------------

inline bool applicable(const Machine& m, const SignedRule& sr, const AdmissibleWord& w) {
  for (std::size_t k = 0; k < w.states.size(); ++k) {
    if (w.states[k].sym != m.rule_part(sr, w.part_idx[k]).from) return false;
  }
  for (std::size_t i = 0; i < w.gaps.size(); ++i) {
    const SectorDomain& d = m.rule_domain(sr, w.sector[i]);
    for (const Letter& l : w.gaps[i])
      if (!d.allows(l.sym)) return false;
  }
  return true;
}

struct ApplyReceipt {
  AdmissibleWord result;
  Word trimmed_front;  // tape letters stripped before the first state letter
  Word trimmed_back;
};

struct ApplyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline ApplyReceipt apply(const Machine& m, const SignedRule& sr, const AdmissibleWord& w) {
  if (!applicable(m, sr, w)) {
    throw ApplyError("rule " + m.rule_of(sr).name + (sr.exp < 0 ? "^-1" : "") +
                     " not applicable to " + to_string(w));
  }
  Word flat;
  flat.reserve(w.flatten().size() + 2 * w.states.size() + 2);
  for (std::size_t k = 0; k < w.states.size(); ++k) {
    RulePart rp = m.rule_part(sr, w.part_idx[k]);
    const Letter& q = w.states[k];
    Letter q2{q.alph, rp.to, q.exp};
    if (q.exp > 0) {
      // q -> left q' right
      flat.insert(flat.end(), rp.left.begin(), rp.left.end());
      flat.push_back(q2);
      flat.insert(flat.end(), rp.right.begin(), rp.right.end());
    } else {
      Word ri = inverse(rp.right), li = inverse(rp.left);
      flat.insert(flat.end(), ri.begin(), ri.end());
      flat.push_back(q2);
      flat.insert(flat.end(), li.begin(), li.end());
    }
    if (k < w.gaps.size()) flat.insert(flat.end(), w.gaps[k].begin(), w.gaps[k].end());
  }
  flat = reduce(flat);
  // trim tape letters outside the outermost state letters
  ApplyReceipt rec;
  std::size_t lo = 0, hi = flat.size();
  while (lo < hi && !m.is_state_alph(flat[lo].alph)) rec.trimmed_front.push_back(flat[lo++]);
  while (hi > lo && !m.is_state_alph(flat[hi - 1].alph)) {
    rec.trimmed_back.insert(rec.trimmed_back.begin(), flat[hi - 1]);
    --hi;
  }
  rec.result = parse_admissible(m, Word(flat.begin() + lo, flat.begin() + hi));
  // a rule never changes the base of an admissible word; enforced always,
  // not just in debug builds, since everything downstream relies on it
  if (!(rec.result.base() == w.base()))
    throw ApplyError("base changed under rule application (internal error)");
  return rec;
}

// ---------------------------------------------------------------------------
// Computations
// ---------------------------------------------------------------------------

struct Computation {
  std::vector<AdmissibleWord> trace;  // trace.size() == history.size() + 1
  History history;

  const AdmissibleWord& start() const { return trace.front(); }
  const AdmissibleWord& end() const { return trace.back(); }
  std::size_t length() const { return history.size(); }
  bool reduced() const { return history_reduced(history); }

  std::vector<std::size_t> a_lengths() const {
    std::vector<std::size_t> v;
    v.reserve(trace.size());
    for (const auto& w : trace) v.push_back(w.a_length());
    return v;
  }
  std::size_t max_a_length() const {
    std::size_t mx = 0;
    for (const auto& w : trace) mx = std::max(mx, w.a_length());
    return mx;
  }
};

struct RunResult {
  Computation comp;
  bool ok = true;
  std::size_t failed_at = 0;  // index of the first non-applicable rule when !ok
  std::string error;
};

inline RunResult run(const Machine& m, const AdmissibleWord& w0, const History& h) {
  RunResult r;
  r.comp.trace.push_back(w0);
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!applicable(m, h[i], r.comp.trace.back())) {
      r.ok = false;
      r.failed_at = i;
      r.error = "rule " + m.rule_of(h[i]).name + (h[i].exp < 0 ? "^-1" : "") +
                " not applicable at step " + std::to_string(i);
      return r;
    }
    r.comp.trace.push_back(apply(m, h[i], r.comp.trace.back()).result);
    r.comp.history.push_back(h[i]);
  }
  return r;
}

// Step history: maximal runs of equal step labels, e.g. (1)(12)(2).
inline std::vector<std::string> step_history(const Machine& m, const History& h) {
  std::vector<std::string> out;
  for (const SignedRule& sr : h) {
    const Rule& r = m.rule_of(sr);
    const std::string& lab = r.step.empty() ? r.name : r.step;
    if (out.empty() || out.back() != lab) out.push_back(lab);
  }
  return out;
}

inline std::string step_history_string(const Machine& m, const History& h) {
  std::string s;
  for (const auto& lab : step_history(m, h)) s += "(" + lab + ")";
  return s;
}

// ---------------------------------------------------------------------------
// Configurations of recognizing machines
// ---------------------------------------------------------------------------

// Build a configuration (standard base) from a tape assignment; sectors not
// present in the map get the empty word. Chooser picks each part's letter.
template <typename Chooser>
inline AdmissibleWord make_configuration(const Machine& m, Chooser&& choose,
                                         const std::unordered_map<std::size_t, Word>& tape) {
  Word flat;
  for (std::size_t i = 0; i < m.num_parts(); ++i) {
    flat.push_back(m.state(i, choose(i)));
    if (i + 1 < m.num_parts()) {
      auto it = tape.find(i + 1);
      if (it != tape.end()) flat.insert(flat.end(), it->second.begin(), it->second.end());
    }
  }
  // cyclic machines keep no trailing tape word here: a configuration starts
  // and ends with state letters, and the wraparound tape word would not be
  // representable, so sector 0 content is not supported in configurations
  return parse_admissible(m, flat);
}

inline std::uint32_t require_start(const Machine& m, std::size_t i) {
  if (!m.parts[i].start) throw std::runtime_error("part has no start letter");
  return *m.parts[i].start;
}
inline std::uint32_t require_end(const Machine& m, std::size_t i) {
  if (!m.parts[i].end) throw std::runtime_error("part has no end letter");
  return *m.parts[i].end;
}

inline AdmissibleWord start_configuration(const Machine& m,
                                          const std::unordered_map<std::size_t, Word>& tape) {
  return make_configuration(m, [&](std::size_t i) { return require_start(m, i); }, tape);
}

inline AdmissibleWord end_configuration(const Machine& m,
                                        const std::unordered_map<std::size_t, Word>& tape) {
  return make_configuration(m, [&](std::size_t i) { return require_end(m, i); }, tape);
}

// Input configuration: start letters, given words in the input sectors only.
inline AdmissibleWord input_configuration(const Machine& m,
                                          const std::unordered_map<std::size_t, Word>& inputs) {
  for (const auto& [j, w] : inputs) {
    if (!m.is_input_sector(j))
      throw std::runtime_error("sector " + std::to_string(j) + " is not an input sector");
    (void)w;
  }
  return start_configuration(m, inputs);
}

// The accept configuration: end letters, every tape word empty.
inline AdmissibleWord accept_configuration(const Machine& m) {
  return end_configuration(m, {});
}

inline bool all_start_letters(const Machine& m, const AdmissibleWord& w) {
  for (std::size_t k = 0; k < w.states.size(); ++k) {
    const Part& p = m.parts[w.part_idx[k]];
    if (!p.start || w.states[k].sym != *p.start) return false;
  }
  return true;
}

inline bool all_end_letters(const Machine& m, const AdmissibleWord& w) {
  for (std::size_t k = 0; k < w.states.size(); ++k) {
    const Part& p = m.parts[w.part_idx[k]];
    if (!p.end || w.states[k].sym != *p.end) return false;
  }
  return true;
}

struct AdmissibleWordHash {
  std::size_t operator()(const AdmissibleWord& w) const {
    WordHash h;
    std::size_t a = h(w.flatten());
    return a;
  }
};

}  // namespace smw

#endif
