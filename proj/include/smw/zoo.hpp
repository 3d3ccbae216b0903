// The machine zoo: the primitive machines LR/RL and their k-fold versions,
// the cleaning machine, the one-letter machines and Move1.
//
// Canonical computations are built constructively from the known shape of the
// history and then validated by run(); nothing in here searches.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "smw/build.hpp"
#include "smw/machine.hpp"

namespace smw {

inline std::size_t alph_index(const Alphabet& a, std::uint32_t sym) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.letters[i] == sym) return i;
  throw std::runtime_error("letter " + name_of(sym) + " not in alphabet " + name_of(a.name));
}

// disjoint copy of an alphabet: letter "a" becomes "a<suffix>"
inline Alphabet copy_alphabet(const Alphabet& src, std::string_view copy_name,
                              std::string_view suffix) {
  std::vector<std::string> ls;
  ls.reserve(src.size());
  for (auto sym : src.letters) ls.push_back(name_of(sym) + std::string(suffix));
  return Alphabet(copy_name, ls);
}

// map a word letterwise between two copies of the same alphabet, by position
inline Word copy_word(const Alphabet& from, const Alphabet& to, const Word& w) {
  if (from.size() != to.size())
    throw std::runtime_error("copy_word: alphabet sizes differ");
  Word out;
  out.reserve(w.size());
  for (const Letter& l : w) out.push_back(to.at(alph_index(from, l.sym), l.exp));
  return out;
}

// signed rule by name; throws when the machine has no such rule
inline SignedRule named_rule(const Machine& m, const std::string& rule_name, int exp = 1) {
  auto i = m.find_rule(rule_name);
  if (!i) throw std::runtime_error("machine " + m.name + " has no rule " + rule_name);
  return SignedRule{*i, exp};
}

namespace detail {

inline std::vector<std::string> indexed_letters(const std::string& stem, std::size_t n) {
  std::vector<std::string> v;
  v.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) v.push_back(stem + std::to_string(i));
  return v;
}

// tape copies are named "<orig>_<sector>"; recover the original name
inline std::string orig_name(std::uint32_t sym) {
  const std::string& n = name_of(sym);
  auto p = n.rfind('_');
  return p == std::string::npos ? n : n.substr(0, p);
}

inline Letter tape_letter(const Machine& m, std::size_t sector, const std::string& orig,
                          int exp = 1) {
  const Alphabet& a = m.tapes.at(sector);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (orig_name(a.letters[i]) == orig) return a.at(i, exp);
  throw std::runtime_error("no copy of " + orig + " on tape " + std::to_string(sector));
}

// rule names look like "head" or "head(arg)" or "head(arg1,arg2)"
inline std::string rule_head(const std::string& rule_name) {
  auto p = rule_name.find('(');
  return p == std::string::npos ? rule_name : rule_name.substr(0, p);
}

inline std::vector<std::string> rule_args(const std::string& rule_name) {
  auto p = rule_name.find('(');
  if (p == std::string::npos) return {};
  std::vector<std::string> args;
  std::string inside = rule_name.substr(p + 1, rule_name.size() - p - 2);
  std::size_t start = 0;
  while (start <= inside.size()) {
    auto comma = inside.find(',', start);
    if (comma == std::string::npos) {
      args.push_back(inside.substr(start));
      break;
    }
    args.push_back(inside.substr(start, comma - start));
    start = comma + 1;
  }
  return args;
}

inline void expect_end(const Machine& m, const RunResult& r, const AdmissibleWord& want,
                       const char* what) {
  if (!r.ok) throw std::logic_error(std::string(what) + ": " + r.error);
  if (!(r.comp.end() == want))
    throw std::logic_error(std::string(what) + ": landed on " + to_string(r.comp.end().flatten()) +
                           " instead of " + to_string(want.flatten()));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// LR_k / RL_k
//
// Base Q P R, each part has letters with subscripts 1..2k; phase 2i-1 moves
// the word between Q and P letterwise into the second sector, phase 2i moves
// it back.  LR eats the first sector from the right in odd phases, RL eats
// the second sector from the left; the connecting rules zeta_j lock whichever
// sector just became empty.

namespace detail {

inline Machine build_primitive(const Alphabet& Y, std::size_t k, bool lr) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  std::string name = lr ? "LR" : "RL";
  if (k > 1) name += "_" + std::to_string(k);
  MachineBuilder mb(name);
  std::string last = std::to_string(2 * k);
  std::size_t Q = mb.part("Q", indexed_letters("q", 2 * k), "q1", "q" + last);
  std::size_t P = mb.part("P", indexed_letters("p", 2 * k), "p1", "p" + last);
  mb.part("R", indexed_letters("r", 2 * k), "r1", "r" + last);
  Alphabet y1 = copy_alphabet(Y, "Y1", "_1");
  Alphabet y2 = copy_alphabet(Y, "Y2", "_2");
  mb.tape(1, y1);
  mb.tape(2, y2);
  (void)Q;
  auto tau_family = [&](std::size_t j, bool eats_first) {
    std::string js = std::to_string(j);
    for (std::size_t iy = 0; iy < Y.size(); ++iy) {
      auto r = mb.rule("tau" + js + "(" + name_of(Y.letters[iy]) + ")");
      r.step(js);
      for (std::size_t part = 0; part < 3; ++part) {
        const char* stem = part == 0 ? "q" : part == 1 ? "p" : "r";
        r.fix(part, stem + js);
      }
      if (eats_first)
        r.left(P, y1.at(iy, -1)).right(P, y2.at(iy));
      else
        r.left(P, y1.at(iy)).right(P, y2.at(iy, -1));
      r.done();
    }
  };
  auto zeta = [&](std::size_t j, std::size_t locked) {
    auto r = mb.rule("zeta" + std::to_string(j));
    r.step("z" + std::to_string(j));
    for (std::size_t part = 0; part < 3; ++part) {
      const char* stem = part == 0 ? "q" : part == 1 ? "p" : "r";
      r.map(part, stem + std::to_string(j), stem + std::to_string(j + 1));
    }
    r.lock(locked).done();
  };
  for (std::size_t i = 1; i <= k; ++i) {
    tau_family(2 * i - 1, lr);
    zeta(2 * i - 1, lr ? 1 : 2);
    tau_family(2 * i, !lr);
    if (i < k) zeta(2 * i, lr ? 2 : 1);
  }
  return mb.finish();
}

}  // namespace detail

inline Machine build_lr_k(const Alphabet& Y, std::size_t k) {
  return detail::build_primitive(Y, k, true);
}
inline Machine build_rl_k(const Alphabet& Y, std::size_t k) {
  return detail::build_primitive(Y, k, false);
}
inline Machine build_lr(const Alphabet& Y) { return build_lr_k(Y, 1); }
inline Machine build_rl(const Alphabet& Y) { return build_rl_k(Y, 1); }

// The canonical computation of LR_k from q1 u p1 r1 to the same word in the
// end letters; u is a word over the machine's first tape.  Its length is
// 2k*||u|| + 2k - 1.
inline Computation canonical_lr_computation(const Machine& m, std::size_t k, const Word& u) {
  Word flat;
  flat.push_back(m.state(0, "q1"));
  flat.insert(flat.end(), u.begin(), u.end());
  flat.push_back(m.state(1, "p1"));
  flat.push_back(m.state(2, "r1"));
  AdmissibleWord w0 = parse_admissible(m, flat);

  History h;
  for (std::size_t i = 1; i <= k; ++i) {
    std::string odd = std::to_string(2 * i - 1);
    std::string even = std::to_string(2 * i);
    for (auto it = u.rbegin(); it != u.rend(); ++it)
      h.push_back(named_rule(m, "tau" + odd + "(" + detail::orig_name(it->sym) + ")", it->exp));
    h.push_back(named_rule(m, "zeta" + odd));
    for (const Letter& l : u)
      h.push_back(named_rule(m, "tau" + even + "(" + detail::orig_name(l.sym) + ")", l.exp));
    if (i < k) h.push_back(named_rule(m, "zeta" + even));
  }

  RunResult r = run(m, w0, h);
  std::string last = std::to_string(2 * k);
  Word want;
  want.push_back(m.state(0, "q" + last));
  want.insert(want.end(), u.begin(), u.end());
  want.push_back(m.state(1, "p" + last));
  want.push_back(m.state(2, "r" + last));
  detail::expect_end(m, r, parse_admissible(m, want), "canonical LR computation");
  return r.comp;
}

// ---------------------------------------------------------------------------
// Clean
//
// Base P Q R with singleton parts.  The first sector holds both the given
// letters and the noise letters; the second a primed copy of the given ones.
// tau1(y) = [q -> y^-1 q y'] eats one trailing letter of the first sector and
// records it (primed) in the second; tau1(z) just eats.

inline Machine build_clean(const Alphabet& Y, const Alphabet& Z) {
  MachineBuilder mb("Clean");
  mb.part("P", {"p"});
  mb.part("Q", {"q"});
  mb.part("R", {"r"});
  std::vector<std::string> yz;
  for (auto sym : Y.letters) yz.push_back(name_of(sym));
  for (auto sym : Z.letters) yz.push_back(name_of(sym));
  Alphabet t1("YZ", yz);
  Alphabet t2 = copy_alphabet(Y, "Y'", "'");
  mb.tape(1, t1);
  mb.tape(2, t2);
  for (std::size_t i = 0; i < t1.size(); ++i) {
    auto r = mb.rule("tau1(" + name_of(t1.letters[i]) + ")");
    r.step("1").left(1, t1.at(i, -1));
    if (i < t2.size()) r.right(1, t2.at(i));
    r.done();
  }
  return mb.finish();
}

// projection of a first-sector word: drop noise, prime the rest, reduce
inline Word clean_word(const Machine& m, const Word& v) {
  const Alphabet& t1 = m.tapes.at(1);
  const Alphabet& t2 = m.tapes.at(2);
  Word out;
  for (const Letter& l : v) {
    std::size_t i = alph_index(t1, l.sym);
    if (i < t2.size()) out.push_back(t2.at(i, l.exp));
  }
  return reduce(out);
}

// The cleaning computation p v q r -> p q u r; eats v from the right, one
// rule per letter, so its length is exactly ||v||.
inline Computation cleaning(const Machine& m, const Word& v) {
  Word flat;
  flat.push_back(m.state(0, "p"));
  flat.insert(flat.end(), v.begin(), v.end());
  flat.push_back(m.state(1, "q"));
  flat.push_back(m.state(2, "r"));
  AdmissibleWord w0 = parse_admissible(m, flat);

  History h;
  for (auto it = v.rbegin(); it != v.rend(); ++it)
    h.push_back(named_rule(m, "tau1(" + name_of(it->sym) + ")", it->exp));

  RunResult r = run(m, w0, h);
  Word u = clean_word(m, v);
  Word want;
  want.push_back(m.state(0, "p"));
  want.push_back(m.state(1, "q"));
  want.insert(want.end(), u.begin(), u.end());
  want.push_back(m.state(2, "r"));
  detail::expect_end(m, r, parse_admissible(m, want), "cleaning computation");
  return r.comp;
}

// ---------------------------------------------------------------------------
// One-letter machines and Move1
//
// One(y) over X has base Q0 Q1 Q2 Q3 with the input sector between Q0 and Q1
// and part letters indexed s, 1..6, f.  A full pass appends y^-1 to the input
// and multiplies the Q2Q3-sector word by y on the left:
//
//   sigma_s, then an RL-style phase on indices 1/2 that parks the sector word
//   between Q1 and Q2, theta(y) which does the actual multiplication, then a
//   second RL-style phase on 5/6 that parks and restores the new word.
//
// Move1 glues one copy of that interior per letter y of X between the end
// letters, plus the transition rule theta_sf from the start letters.

namespace detail {

// shared by build_one_letter and build_move1; tag is empty for the former
// and the letter y for the latter (it lands in rule names, step labels and
// the interior state letters)
inline void one_interior(MachineBuilder& mb, const Alphabet& x1, const Alphabet& x2,
                         const Alphabet& x3, std::size_t iy, const std::string& tag,
                         const std::string& from_letter, const std::string& to_letter) {
  auto st = [&](std::size_t i, const std::string& idx) {
    std::string s = "q" + std::to_string(i) + "(" + idx;
    if (!tag.empty()) s += "," + tag;
    return s + ")";
  };
  auto envelope = [&](std::size_t i, const std::string& which) {
    return "q" + std::to_string(i) + "(" + which + ")";
  };
  auto rname = [&](const std::string& head) {
    return tag.empty() ? head : head + "(" + tag + ")";
  };
  auto fname = [&](const std::string& head, std::size_t ix, const Alphabet& x) {
    std::string n = head + "(";
    if (!tag.empty()) n += tag + ",";
    return n + orig_name(x.letters[ix]) + ")";
  };
  auto slabel = [&](const std::string& s) { return tag.empty() ? s : s + "(" + tag + ")"; };
  auto allmap = [&](RuleBuilder& r, const std::string& from, const std::string& to) {
    for (std::size_t i = 0; i < 4; ++i) r.map(i, from == "env" ? envelope(i, from_letter) : st(i, from),
                                              to == "env" ? envelope(i, to_letter) : st(i, to));
  };
  {
    auto r = mb.rule(rname("sigma_s")).step(slabel("s1"));
    allmap(r, "env", "1");
    r.lock(2).done();
  }
  auto tau_family = [&](const std::string& head, const std::string& idx, bool park) {
    for (std::size_t ix = 0; ix < x2.size(); ++ix) {
      auto r = mb.rule(fname(head, ix, x2)).step(slabel(idx));
      allmap(r, idx, idx);
      if (park)
        r.left(2, x2.at(ix)).right(2, x3.at(ix, -1));
      else
        r.left(2, x2.at(ix, -1)).right(2, x3.at(ix));
      r.done();
    }
  };
  tau_family("tau1", "1", true);
  {
    auto r = mb.rule(rname("xi12")).step(slabel("12"));
    allmap(r, "1", "2");
    r.lock(3).done();
  }
  tau_family("tau2", "2", false);
  {
    auto r = mb.rule(rname("tau_s")).step(slabel("23"));
    allmap(r, "2", "3");
    r.lock(2).done();
  }
  {
    // named after the multiplier letter in both variants; for Move1 that
    // coincides with the tag
    auto r = mb.rule("theta(" + orig_name(x1.letters[iy]) + ")").step(slabel("34"));
    allmap(r, "3", "4");
    r.left(1, x1.at(iy, -1)).right(2, x3.at(iy)).lock(2).done();
  }
  {
    auto r = mb.rule(rname("tau_f")).step(slabel("45"));
    allmap(r, "4", "5");
    r.lock(2).done();
  }
  tau_family("tau5", "5", true);
  {
    auto r = mb.rule(rname("xi56")).step(slabel("56"));
    allmap(r, "5", "6");
    r.lock(3).done();
  }
  tau_family("tau6", "6", false);
  {
    auto r = mb.rule(rname("sigma_f")).step(slabel("6f"));
    allmap(r, "6", "env");
    r.lock(2).done();
  }
}

}  // namespace detail

inline Machine build_one_letter(const Alphabet& X, std::string_view y) {
  std::size_t iy = alph_index(X, intern(y));
  MachineBuilder mb("One(" + std::string(y) + ")");
  for (std::size_t i = 0; i < 4; ++i) {
    std::string qi = "q" + std::to_string(i);
    std::vector<std::string> letters{qi + "(s)"};
    for (int j = 1; j <= 6; ++j) letters.push_back(qi + "(" + std::to_string(j) + ")");
    letters.push_back(qi + "(f)");
    mb.part("Q" + std::to_string(i), letters, qi + "(s)", qi + "(f)");
  }
  Alphabet x1 = copy_alphabet(X, "X1", "_1");
  Alphabet x2 = copy_alphabet(X, "X2", "_2");
  Alphabet x3 = copy_alphabet(X, "X3", "_3");
  mb.tape(1, x1);
  mb.tape(2, x2);
  mb.tape(3, x3);
  mb.inputs({1});
  detail::one_interior(mb, x1, x2, x3, iy, "", "s", "f");
  return mb.finish();
}

// the letter a one-letter machine multiplies by (from its theta rule)
inline std::string one_letter_parameter(const Machine& m) {
  for (const Rule& r : m.rules)
    if (detail::rule_head(r.name) == "theta") {
      auto args = detail::rule_args(r.name);
      if (args.size() == 1) return args[0];
    }
  throw std::runtime_error("machine " + m.name + " has no theta rule");
}

inline Machine build_move1(const Alphabet& X) {
  MachineBuilder mb("Move1");
  for (std::size_t i = 0; i < 4; ++i) {
    std::string qi = "q" + std::to_string(i);
    std::vector<std::string> letters{qi + "(s)", qi + "(f)"};
    for (auto sym : X.letters)
      for (int j = 1; j <= 6; ++j)
        letters.push_back(qi + "(" + std::to_string(j) + "," + name_of(sym) + ")");
    mb.part("Q" + std::to_string(i), letters, qi + "(s)", qi + "(f)");
  }
  Alphabet x1 = copy_alphabet(X, "X1", "_1");
  Alphabet x2 = copy_alphabet(X, "X2", "_2");
  Alphabet x3 = copy_alphabet(X, "X3", "_3");
  mb.tape(1, x1);
  mb.tape(2, x2);
  mb.tape(3, x3);
  mb.inputs({1});
  {
    auto r = mb.rule("theta_sf").step("sf");
    for (std::size_t i = 0; i < 4; ++i) {
      std::string qi = "q" + std::to_string(i);
      r.map(i, qi + "(s)", qi + "(f)");
    }
    r.lock(2).lock(3).done();
  }
  for (std::size_t iy = 0; iy < X.size(); ++iy)
    detail::one_interior(mb, x1, x2, x3, iy, name_of(X.letters[iy]), "f", "f");
  return mb.finish();
}

// History of one full pass of the y-interior, taking the Q2Q3-sector word
// from c to red(y c).  tag selects the rule names: empty for One(y), y itself
// for the copy inside Move1.  Length is 7 + 2||c|| + 2||red(y c)||.
inline History one_leg(const Machine& m, const std::string& tag, const std::string& y,
                       const Word& c) {
  auto plain = [&](const std::string& head) {
    return tag.empty() ? head : head + "(" + tag + ")";
  };
  auto fam = [&](const std::string& head, const Letter& l) {
    std::string x = detail::orig_name(l.sym);
    std::string n = tag.empty() ? head + "(" + x + ")" : head + "(" + tag + "," + x + ")";
    return named_rule(m, n, l.exp);
  };
  Word cp = reduce(concat(Word{detail::tape_letter(m, 3, y)}, c));
  History h;
  h.push_back(named_rule(m, plain("sigma_s")));
  for (const Letter& l : c) h.push_back(fam("tau1", l));
  h.push_back(named_rule(m, plain("xi12")));
  for (auto it = c.rbegin(); it != c.rend(); ++it) h.push_back(fam("tau2", *it));
  h.push_back(named_rule(m, plain("tau_s")));
  h.push_back(named_rule(m, "theta(" + y + ")"));
  h.push_back(named_rule(m, plain("tau_f")));
  for (const Letter& l : cp) h.push_back(fam("tau5", l));
  h.push_back(named_rule(m, plain("xi56")));
  for (auto it = cp.rbegin(); it != cp.rend(); ++it) h.push_back(fam("tau6", *it));
  h.push_back(named_rule(m, plain("sigma_f")));
  return h;
}

// The canonical computation of One(y) on the base Q1 Q2 Q3, from
// q1(s) q2(s) w q3(s) to q1(f) q2(f) red(y w) q3(f); w is a word over the
// third tape.  Length 7 + 2||w|| + 2||red(y w)||.
inline Computation canonical_one_computation(const Machine& m, const Word& w) {
  std::string y = one_letter_parameter(m);
  Word flat;
  flat.push_back(m.state(1, "q1(s)"));
  flat.push_back(m.state(2, "q2(s)"));
  flat.insert(flat.end(), w.begin(), w.end());
  flat.push_back(m.state(3, "q3(s)"));
  AdmissibleWord w0 = parse_admissible(m, flat);

  RunResult r = run(m, w0, one_leg(m, "", y, w));
  Word yw = reduce(concat(Word{detail::tape_letter(m, 3, y)}, w));
  Word want;
  want.push_back(m.state(1, "q1(f)"));
  want.push_back(m.state(2, "q2(f)"));
  want.insert(want.end(), yw.begin(), yw.end());
  want.push_back(m.state(3, "q3(f)"));
  detail::expect_end(m, r, parse_admissible(m, want), "canonical one-letter computation");
  return r.comp;
}

// The canonical computation of Move1 from the input configuration of v to the
// end configuration with w between Q2 and Q3 and red(v w^-1-copy) on the input
// tape: theta_sf, then one leg per letter of w, last letter first, so that the
// sector word is always a suffix of w.  With ||w|| = n and v empty the length
// is 2n^2 + 7n + 1.
inline Computation canonical_move1_computation(const Machine& m, const Word& w, const Word& v) {
  if (!is_reduced(w)) throw std::invalid_argument("target word must be reduced");
  AdmissibleWord w0 = input_configuration(m, {{1, v}});

  History h;
  h.push_back(named_rule(m, "theta_sf"));
  Word content;
  for (std::size_t i = w.size(); i-- > 0;) {
    const Letter& l = w[i];
    std::string z = detail::orig_name(l.sym);
    if (l.exp > 0) {
      History leg = one_leg(m, z, z, content);
      h.insert(h.end(), leg.begin(), leg.end());
      content = reduce(concat(Word{l}, content));
    } else {
      Word next = reduce(concat(Word{l}, content));
      History leg = history_inverse(one_leg(m, z, z, next));
      h.insert(h.end(), leg.begin(), leg.end());
      content = next;
    }
  }

  RunResult r = run(m, w0, h);
  Word w_inv_input = copy_word(m.tapes.at(3), m.tapes.at(1), inverse(w));
  AdmissibleWord want = end_configuration(
      m, {{1, reduce(concat(v, w_inv_input))}, {3, w}});
  detail::expect_end(m, r, want, "canonical Move1 computation");
  return r.comp;
}

// ---------------------------------------------------------------------------
// End histories of Move1 factor uniquely into legs: each starts with
// sigma_s(y) and ends with the matching sigma_f(y) (or the inverse pair, in
// reverse).  factor_end_history recovers the sequence of (y, direction).

struct OneLeg {
  std::string y;
  int exp = 1;  // +1 forward, -1 backward
};

inline std::vector<OneLeg> factor_end_history(const Machine& m, const History& h) {
  std::vector<OneLeg> legs;
  std::size_t i = 0;
  while (i < h.size()) {
    const std::string& n0 = m.rule_of(h[i]).name;
    std::string head = detail::rule_head(n0);
    if (head == "theta_sf")
      throw std::runtime_error("not an end history: contains theta_sf");
    bool fwd;
    if (head == "sigma_s" && h[i].exp > 0)
      fwd = true;
    else if (head == "sigma_f" && h[i].exp < 0)
      fwd = false;
    else
      throw std::runtime_error("not an end history: unexpected " + n0 + " at position " +
                               std::to_string(i));
    std::string y = detail::rule_args(n0).at(0);
    std::string closer = fwd ? "sigma_f" : "sigma_s";
    std::size_t j = i + 1;
    for (;; ++j) {
      if (j >= h.size())
        throw std::runtime_error("not an end history: unterminated leg for " + y);
      const std::string& nj = m.rule_of(h[j]).name;
      auto hj = detail::rule_head(nj);
      auto aj = detail::rule_args(nj);
      if (hj == "theta_sf" || aj.empty() || aj[0] != y)
        throw std::runtime_error("not an end history: leg for " + y + " interrupted at " + nj);
      if (hj == closer && (fwd ? h[j].exp > 0 : h[j].exp < 0)) break;
    }
    legs.push_back(OneLeg{y, fwd ? 1 : -1});
    i = j + 1;
  }
  return legs;
}

}  // namespace smw
