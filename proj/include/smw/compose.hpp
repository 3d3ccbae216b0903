#pragma once

// Composition operators that assemble recognizer pipelines out of the zoo
// machines.  The ladder runs:
//
//   compose            three stages glued by transition rules     -> M1
//   add_history        records the applied rule sequence in fresh
//                      "historical" input sectors                 -> M2
//   split_history      each historical sector becomes a triple    -> bar-M2
//   append_primitive   a 2k-phase shuttle pass over the history   -> M3
//   append_eraser      rules that erase the recorded history      -> M4
//   make_cyclic        one-letter part {t} closes the base        -> bar-M4
//   prepend_primitive  a leading 2-phase pass, input left open    -> M5
//   parallelize        L coordinate copies run in lockstep        -> M6,1 / M6,2
//   main_machine       two branches behind fresh start/end states -> M
//
// Historical sectors carry two disjoint copies of the positive working rule
// names (the "left" and "right" historical alphabets).  A working rule theta
// multiplies each primed historical sector by theta_l^-1 on the left and
// theta_r on the right, so a computation from the left copy of H back to a
// clean frame forces the applied history to be H itself.  That is the whole
// trick: the machine accepts the pair (w, H) only when H is an accepting
// history for w, and the transition domains make the stages run in order.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "smw/engine.hpp"
#include "smw/move.hpp"
#include "smw/zoo.hpp"

namespace smw {

// ---------------------------------------------------------------------------
// Generic staged composition

struct SubmachineUse {
  const Machine* m = nullptr;
  std::size_t offset = 0;  // composed index of the stage's part 0
  std::string tag;         // state prefix and step label, e.g. "1"
};

struct TransitionSpec {
  std::string name;
  std::string step;
  std::vector<std::size_t> unlocked;  // sectors left with a full domain
  // sector -> letter positions kept in a Subset domain
  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> domains;
  // optional explicit state maps (one letter name per composed part); when
  // empty the rule runs stage-j end letters to stage-(j+1) start letters
  std::vector<std::string> source, target;
};

struct ComposeSpec {
  std::string name;
  std::size_t parts = 0;  // total base length; 0 means the footprint union
  std::vector<std::string> part_names;  // optional, defaults to B0..B{P-1}
  std::vector<SubmachineUse> stages;
  std::vector<TransitionSpec> transitions;  // one per adjacent stage pair
  std::vector<std::size_t> inputs;
};

namespace detail {

inline std::string tagged(const std::string& tag, std::uint32_t sym) {
  return tag + "." + name_of(sym);
}

// parts outside a stage's footprint idle in a single parked letter
inline std::string parked(const std::string& tag) { return tag + ".o"; }

inline std::uint32_t stage_start(const Machine& m, std::size_t p) {
  const Part& pt = m.parts[p];
  if (pt.start) return *pt.start;
  if (pt.letters.size() == 1) return pt.letters.letters[0];
  throw std::invalid_argument("stage machine part " + name_of(pt.letters.name) +
                              " has no start letter");
}

inline std::uint32_t stage_end(const Machine& m, std::size_t p) {
  const Part& pt = m.parts[p];
  if (pt.end) return *pt.end;
  if (pt.letters.size() == 1) return pt.letters.letters[0];
  throw std::invalid_argument("stage machine part " + name_of(pt.letters.name) +
                              " has no end letter");
}

inline Word map_tape_word(const Alphabet& from, const Alphabet& to, const Word& w) {
  return copy_word(from, to, w);
}

inline SectorDomain map_domain(const Alphabet& from, const Alphabet& to,
                               const SectorDomain& d) {
  SectorDomain out;
  out.kind = d.kind;
  if (d.kind == SectorDomain::Subset)
    for (auto sym : d.letters) out.letters.push_back(to.letters[alph_index(from, sym)]);
  return out;
}

}  // namespace detail

inline Machine compose(const ComposeSpec& spec) {
  if (spec.stages.empty()) throw std::invalid_argument("compose wants at least one stage");
  for (const auto& st : spec.stages)
    if (!st.m) throw std::invalid_argument("compose stage has no machine");
  if (spec.stages.size() == 1 && spec.transitions.empty() &&
      spec.stages[0].offset == 0 &&
      (spec.parts == 0 || spec.parts == spec.stages[0].m->num_parts()))
    return *spec.stages[0].m;  // composing a single machine is the identity
  if (spec.transitions.size() + 1 != spec.stages.size())
    throw std::invalid_argument("compose wants one transition per adjacent stage pair");

  std::size_t P = spec.parts;
  for (const auto& st : spec.stages) {
    if (st.m->cyclic) throw std::invalid_argument("compose stages must be linear machines");
    P = std::max(P, st.offset + st.m->num_parts());
  }
  if (!spec.part_names.empty() && spec.part_names.size() != P)
    throw std::invalid_argument("compose part name count mismatch");

  auto in_stage = [&](const SubmachineUse& st, std::size_t p) {
    return p >= st.offset && p < st.offset + st.m->num_parts();
  };

  Machine out;
  out.name = spec.name;

  // parts: per stage either a tagged copy of the stage's part or one parked
  // letter; start letters come from the first stage, end letters from the last
  for (std::size_t p = 0; p < P; ++p) {
    std::vector<std::string> ls;
    for (const auto& st : spec.stages) {
      if (in_stage(st, p))
        for (auto sym : st.m->parts[p - st.offset].letters.letters)
          ls.push_back(detail::tagged(st.tag, sym));
      else
        ls.push_back(detail::parked(st.tag));
    }
    std::string nm = spec.part_names.empty() ? "B" + std::to_string(p) : spec.part_names[p];
    Part part{Alphabet(nm, ls), std::nullopt, std::nullopt};
    const auto& first = spec.stages.front();
    const auto& last = spec.stages.back();
    part.start = intern(in_stage(first, p)
                            ? detail::tagged(first.tag, detail::stage_start(*first.m, p - first.offset))
                            : detail::parked(first.tag));
    part.end = intern(in_stage(last, p)
                          ? detail::tagged(last.tag, detail::stage_end(*last.m, p - last.offset))
                          : detail::parked(last.tag));
    out.parts.push_back(std::move(part));
  }

  // tapes: the first stage covering a sector donates its alphabet; later
  // claimants are identified with it letter-by-letter and must match in size
  out.tapes.assign(P, Alphabet("", {}));
  std::vector<bool> claimed(P, false);
  std::set<std::string> tape_names;
  for (const auto& st : spec.stages) {
    for (std::size_t l = 1; l < st.m->num_parts(); ++l) {
      std::size_t g = st.offset + l;
      const Alphabet& a = st.m->tapes[l];
      if (!claimed[g]) {
        std::string nm = name_of(a.name);
        if (!tape_names.insert(nm).second) {
          nm += "@" + std::to_string(g);
          tape_names.insert(nm);
        }
        std::vector<std::string> ls;
        for (auto sym : a.letters) ls.push_back(name_of(sym));
        out.tapes[g] = Alphabet(nm, ls);
        claimed[g] = true;
      } else if (a.size() != out.tapes[g].size()) {
        throw std::invalid_argument("incompatible sector alphabets at sector " +
                                    std::to_string(g) + ": " + name_of(out.tapes[g].name) +
                                    " vs " + name_of(a.name));
      }
    }
  }
  for (std::size_t j = 0; j < P; ++j)
    if (!claimed[j]) out.tapes[j] = Alphabet(spec.name + "-empty-tape-" + std::to_string(j), {});

  // rules, stage-major with the transitions interleaved
  std::set<std::string> rule_names;
  auto stage_rule = [&](const SubmachineUse& st, const Rule& r) {
    Rule nr;
    nr.name = rule_names.insert(r.name).second ? r.name : st.tag + "." + r.name;
    rule_names.insert(nr.name);
    nr.step = st.tag;
    nr.parts.resize(P);
    nr.domains.assign(P, SectorDomain{SectorDomain::Locked, {}});
    for (std::size_t p = 0; p < P; ++p) {
      if (!in_stage(st, p)) {
        std::uint32_t o = intern(detail::parked(st.tag));
        nr.parts[p] = RulePart{o, o, {}, {}};
        continue;
      }
      const RulePart& rp = r.parts[p - st.offset];
      nr.parts[p].from = intern(detail::tagged(st.tag, rp.from));
      nr.parts[p].to = intern(detail::tagged(st.tag, rp.to));
      if (!rp.left.empty())
        nr.parts[p].left = detail::map_tape_word(st.m->tapes[p - st.offset], out.tapes[p], rp.left);
      if (!rp.right.empty())
        nr.parts[p].right =
            detail::map_tape_word(st.m->tapes[p - st.offset + 1], out.tapes[p + 1], rp.right);
    }
    for (std::size_t l = 1; l < st.m->num_parts(); ++l)
      nr.domains[st.offset + l] =
          detail::map_domain(st.m->tapes[l], out.tapes[st.offset + l], r.domains[l]);
    return nr;
  };

  auto transition_rule = [&](std::size_t j) {
    const TransitionSpec& ts = spec.transitions[j];
    const SubmachineUse& a = spec.stages[j];
    const SubmachineUse& b = spec.stages[j + 1];
    Rule nr;
    nr.name = ts.name.empty() ? "sigma(" + a.tag + b.tag + ")" : ts.name;
    if (!rule_names.insert(nr.name).second)
      throw std::invalid_argument("transition rule name collision: " + nr.name);
    nr.step = ts.step.empty() ? a.tag + b.tag : ts.step;
    nr.parts.resize(P);
    nr.domains.assign(P, SectorDomain{SectorDomain::Locked, {}});
    for (std::size_t p = 0; p < P; ++p) {
      std::string from =
          !ts.source.empty()
              ? ts.source[p]
              : (in_stage(a, p) ? detail::tagged(a.tag, detail::stage_end(*a.m, p - a.offset))
                                : detail::parked(a.tag));
      std::string to =
          !ts.target.empty()
              ? ts.target[p]
              : (in_stage(b, p) ? detail::tagged(b.tag, detail::stage_start(*b.m, p - b.offset))
                                : detail::parked(b.tag));
      if (!out.parts[p].letters.contains(intern(from)) ||
          !out.parts[p].letters.contains(intern(to)))
        throw std::invalid_argument("transition " + nr.name + " states missing in part " +
                                    name_of(out.parts[p].letters.name));
      nr.parts[p] = RulePart{intern(from), intern(to), {}, {}};
    }
    for (auto s : ts.unlocked) nr.domains.at(s) = SectorDomain{SectorDomain::Full, {}};
    for (const auto& [s, pos] : ts.domains) {
      SectorDomain d{SectorDomain::Subset, {}};
      for (auto i : pos) d.letters.push_back(out.tapes.at(s).letters.at(i));
      nr.domains.at(s) = d;
    }
    return nr;
  };

  for (std::size_t j = 0; j < spec.stages.size(); ++j) {
    for (const Rule& r : spec.stages[j].m->rules) out.rules.push_back(stage_rule(spec.stages[j], r));
    if (j + 1 < spec.stages.size()) out.rules.push_back(transition_rule(j));
  }

  out.input_sectors = spec.inputs;
  out.finalize();
  return out;
}

// ---------------------------------------------------------------------------
// Accept padding: chain the end letters through k-1 fresh states so every
// accepting computation picks up k-1 extra steps (and so has length >= k,
// the original accepting run being nonempty).

inline Machine pad_accept(const Machine& m, std::size_t k) {
  if (k <= 1) return m;
  Machine out = m;
  out.name += "k" + std::to_string(k);
  std::vector<std::uint32_t> old_end(m.num_parts());
  for (std::size_t p = 0; p < m.num_parts(); ++p) {
    old_end[p] = detail::stage_end(m, p);
    if (m.parts[p].letters.size() == 1) continue;  // one-letter parts stay put
    std::vector<std::string> ls;
    for (auto sym : m.parts[p].letters.letters) ls.push_back(name_of(sym));
    for (std::size_t j = 1; j < k; ++j) ls.push_back("pd" + std::to_string(j));
    out.parts[p].letters = Alphabet(name_of(m.parts[p].letters.name), ls);
    out.parts[p].end = intern("pd" + std::to_string(k - 1));
  }
  for (std::size_t j = 1; j < k; ++j) {
    Rule r;
    r.name = "pad" + std::to_string(j);
    r.parts.resize(m.num_parts());
    r.domains.assign(m.num_slots(), SectorDomain{SectorDomain::Locked, {}});
    for (std::size_t p = 0; p < m.num_parts(); ++p) {
      if (m.parts[p].letters.size() == 1) {
        r.parts[p] = RulePart{old_end[p], old_end[p], {}, {}};
        continue;
      }
      std::uint32_t from = j == 1 ? old_end[p] : intern("pd" + std::to_string(j - 1));
      r.parts[p] = RulePart{from, intern("pd" + std::to_string(j)), {}, {}};
    }
    out.rules.push_back(std::move(r));
  }
  out.finalize();
  return out;
}

// ---------------------------------------------------------------------------
// Shape of a three-stage composition and its positive working rules

struct M1Shape {
  std::size_t n = 0;  // plain parts Q0..Q{n-1}
  std::size_t s = 0;  // primed and double-primed parts run 0..s
  std::vector<std::string> phi;  // positive working rule names, machine order
  std::vector<int> phi_stage;    // 1, 2 or 3 per phi entry
  std::size_t sigma12 = 0, sigma23 = 0;
};

inline M1Shape m1_shape(const Machine& m) {
  M1Shape sh;
  bool s12 = false, s23 = false;
  for (std::size_t i = 0; i < m.rules.size(); ++i) {
    const std::string& st = m.rules[i].step;
    if (st == "1" || st == "2" || st == "3") {
      sh.phi.push_back(m.rules[i].name);
      sh.phi_stage.push_back(st[0] - '0');
    } else if (st == "12" && !s12) {
      sh.sigma12 = i;
      s12 = true;
    } else if (st == "23" && !s23) {
      sh.sigma23 = i;
      s23 = true;
    } else {
      throw std::invalid_argument("operand lacks the expected three-stage partition");
    }
  }
  if (!s12 || !s23 || sh.phi.empty())
    throw std::invalid_argument("operand lacks the expected three-stage partition");
  std::size_t doubled = 0;
  for (const Part& p : m.parts) {
    const std::string& nm = name_of(p.letters.name);
    if (nm.rfind("Q''", 0) == 0)
      ++doubled;
    else if (nm.rfind("Q'", 0) == 0)
      ++sh.s;
    else if (nm.rfind("Q", 0) == 0 && doubled == 0 && sh.s == 0)
      ++sh.n;
    else
      throw std::invalid_argument("operand lacks the expected three-stage partition");
  }
  if (sh.n < 2 || sh.s < 2 || sh.s != doubled || sh.n + 2 * sh.s != m.num_parts())
    throw std::invalid_argument("operand lacks the expected three-stage partition");
  --sh.s;  // parts are indexed 0..s
  return sh;
}

// left block then right block; index i is the left copy of phi[i]
inline Alphabet hist_alphabet(const std::string& name, const std::vector<std::string>& phi) {
  std::vector<std::string> ls;
  for (const auto& r : phi) ls.push_back(r + "_l");
  for (const auto& r : phi) ls.push_back(r + "_r");
  return Alphabet(name, ls);
}

inline std::vector<std::string> phi_names(const Machine& m) {
  std::vector<std::string> phi;
  for (const Rule& r : m.rules)
    if (r.step == "1" || r.step == "2" || r.step == "3") phi.push_back(r.name);
  return phi;
}

// ---------------------------------------------------------------------------
// M2: record the history.  Every primed and double-primed part splits into a
// left/right pair with a fresh historical sector between them; a working rule
// theta multiplies the primed sectors by theta_l^-1 / theta_r and the
// double-primed ones by theta_r^-1 / theta_l.  The transitions keep their
// state behavior but restrict the historical domains so that crossing them
// mid-word forces the recorded stage boundaries to line up.

inline Machine add_history_sectors(const Machine& m1) {
  M1Shape sh = m1_shape(m1);
  const std::size_t n = sh.n, S = sh.s + 1, F = sh.phi.size();
  const std::size_t NP = n + 4 * S;
  auto np_of = [&](std::size_t p) {  // new index of the left copy
    if (p < n) return p;
    if (p < n + S) return n + 2 * (p - n);
    return n + 2 * S + 2 * (p - n - S);
  };

  Machine out;
  out.name = m1.name + "h";

  for (std::size_t p = 0; p < m1.num_parts(); ++p) {
    const Part& src = m1.parts[p];
    const std::string& nm = name_of(src.letters.name);
    std::vector<std::string> ls;
    for (auto sym : src.letters.letters) ls.push_back(name_of(sym));
    if (p < n) {
      out.parts.push_back(Part{Alphabet(nm, ls), src.start, src.end});
    } else {
      out.parts.push_back(Part{Alphabet(nm + "l", ls), src.start, src.end});
      out.parts.push_back(Part{Alphabet(nm + "r", ls), src.start, src.end});
    }
  }

  out.tapes.assign(NP, Alphabet("", {}));
  out.tapes[0] = m1.tapes[0];
  for (std::size_t j = 1; j < m1.num_parts(); ++j) out.tapes[np_of(j)] = m1.tapes[j];
  std::vector<std::size_t> primed, doubled;  // historical sector indexes
  for (std::size_t i = 0; i < S; ++i) {
    std::size_t hp = n + 2 * i + 1, hd = n + 2 * S + 2 * i + 1;
    out.tapes[hp] = hist_alphabet("HM'" + std::to_string(i), sh.phi);
    out.tapes[hd] = hist_alphabet("HM''" + std::to_string(i), sh.phi);
    primed.push_back(hp);
    doubled.push_back(hd);
  }

  std::size_t phi_idx = 0;
  for (const Rule& r : m1.rules) {
    Rule nr;
    nr.name = r.name;
    nr.step = r.step;
    nr.branch = r.branch;
    nr.parts.resize(NP);
    for (std::size_t p = 0; p < m1.num_parts(); ++p) {
      std::size_t q = np_of(p);
      nr.parts[q].from = r.parts[p].from;
      nr.parts[q].to = r.parts[p].to;
      if (p >= n) {
        nr.parts[q + 1].from = r.parts[p].from;
        nr.parts[q + 1].to = r.parts[p].to;
      }
      if (!r.parts[p].left.empty()) nr.parts[q].left = r.parts[p].left;
      if (!r.parts[p].right.empty()) nr.parts[np_of(p + 1) - 1].right = r.parts[p].right;
    }
    nr.domains.assign(NP, SectorDomain{SectorDomain::Locked, {}});
    for (std::size_t j = 1; j < m1.num_parts(); ++j) nr.domains[np_of(j)] = r.domains[j];

    bool working = r.step == "1" || r.step == "2" || r.step == "3";
    if (working) {
      std::size_t idx = phi_idx++;
      for (std::size_t i = 0; i < S; ++i) {
        const Alphabet& hp = out.tapes[primed[i]];
        const Alphabet& hd = out.tapes[doubled[i]];
        nr.parts[primed[i] - 1].right = Word{hp.at(idx, -1)};
        nr.parts[primed[i]].left = Word{hp.at(F + idx, 1)};
        nr.parts[doubled[i] - 1].right = Word{hd.at(F + idx, -1)};
        nr.parts[doubled[i]].left = Word{hd.at(idx, 1)};
        nr.domains[primed[i]] = SectorDomain{SectorDomain::Full, {}};
        nr.domains[doubled[i]] = SectorDomain{SectorDomain::Full, {}};
      }
    } else {
      // sigma(12) admits right copies of stage 1 and left copies of stages
      // 2,3; sigma(23) admits right copies of stages 1,2 and left of stage 3.
      // The doubled sectors hold the inverse of the primed content, which is
      // the same letter set, so both kinds get the same subset.
      int cut = r.step == "12" ? 1 : 2;
      auto stage_gate = [&](std::size_t h) {
        SectorDomain d{SectorDomain::Subset, {}};
        const Alphabet& a = out.tapes[h];
        for (std::size_t x = 0; x < F; ++x) {
          if (sh.phi_stage[x] <= cut) d.letters.push_back(a.letters[F + x]);
          if (sh.phi_stage[x] > cut) d.letters.push_back(a.letters[x]);
        }
        nr.domains[h] = d;
      };
      for (std::size_t h : primed) stage_gate(h);
      for (std::size_t h : doubled) stage_gate(h);
    }
    out.rules.push_back(std::move(nr));
  }

  for (auto j : m1.input_sectors) out.input_sectors.push_back(np_of(j));
  for (auto j : primed) out.input_sectors.push_back(j);
  for (auto j : doubled) out.input_sectors.push_back(j);
  out.finalize();
  return out;
}

// ---------------------------------------------------------------------------
// bar-M2: each historical sector Q'l Q'r grows an interior pair P' R', giving
// sectors Q'l P' (left flank), P' R' (the historical content, still an input
// sector) and R' Q'r (right flank).  Existing rules lock the flanks and act
// on the middle exactly as they acted on the old sector.

inline Machine split_history_sectors(const Machine& m2) {
  auto hist_kind = [](std::uint32_t nm_id) {
    const std::string& nm = name_of(nm_id);
    if (nm.rfind("HM''", 0) == 0) return 2;
    if (nm.rfind("HM'", 0) == 0) return 1;
    return 0;
  };
  std::vector<std::size_t> hists;
  for (std::size_t j = 1; j < m2.num_parts(); ++j)
    if (hist_kind(m2.tapes[j].name)) hists.push_back(j);
  if (hists.empty()) throw std::invalid_argument("operand has no historical sectors");

  const std::size_t NP = m2.num_parts() + 2 * hists.size();
  std::vector<std::size_t> newidx(m2.num_parts());
  std::vector<std::size_t> mid(m2.num_parts(), 0);  // old hist sector -> new middle
  Machine out;
  out.name = m2.name + "s";
  out.tapes.assign(NP, Alphabet("", {}));
  out.tapes[0] = m2.tapes[0];

  auto letters_of = [](const Alphabet& a) {
    std::vector<std::string> ls;
    for (auto sym : a.letters) ls.push_back(name_of(sym));
    return ls;
  };

  std::size_t q = 0;
  for (std::size_t p = 0; p < m2.num_parts(); ++p) {
    const Part& src = m2.parts[p];
    newidx[p] = q;
    out.parts.push_back(
        Part{Alphabet(name_of(src.letters.name), letters_of(src.letters)), src.start, src.end});
    ++q;
    if (p + 1 < m2.num_parts() && hist_kind(m2.tapes[p + 1].name)) {
      int kind = hist_kind(m2.tapes[p + 1].name);
      std::string i = name_of(m2.tapes[p + 1].name).substr(kind == 1 ? 3 : 4);
      std::string pr = kind == 1 ? "'" : "''";
      const Part& rsrc = m2.parts[p + 1];
      out.parts.push_back(Part{Alphabet("P" + pr + i, letters_of(src.letters)), src.start, src.end});
      out.parts.push_back({Alphabet("R" + pr + i, letters_of(rsrc.letters)), rsrc.start, rsrc.end});
      auto hl = letters_of(m2.tapes[p + 1]);
      out.tapes[q] = Alphabet("HL" + pr + i, hl);
      out.tapes[q + 1] = Alphabet("HM" + pr + i, hl);
      out.tapes[q + 2] = Alphabet("HR" + pr + i, hl);
      mid[p + 1] = q + 1;
      q += 2;
    }
  }
  for (std::size_t j = 1; j < m2.num_parts(); ++j)
    if (!hist_kind(m2.tapes[j].name)) out.tapes[newidx[j]] = m2.tapes[j];

  for (const Rule& r : m2.rules) {
    Rule nr;
    nr.name = r.name;
    nr.step = r.step;
    nr.branch = r.branch;
    nr.parts.resize(NP);
    nr.domains.assign(NP, SectorDomain{SectorDomain::Locked, {}});
    for (std::size_t p = 0; p < m2.num_parts(); ++p) {
      RulePart rp = r.parts[p];
      bool hist_right = p + 1 < m2.num_parts() && hist_kind(m2.tapes[p + 1].name);
      bool hist_left = hist_kind(m2.tapes[p].name) != 0;
      Word moved_r, moved_l;
      if (hist_right) {
        moved_r = rp.right;  // relocates to the new middle sector
        rp.right.clear();
      }
      if (hist_left) {
        moved_l = rp.left;
        rp.left.clear();
      }
      nr.parts[newidx[p]] = rp;
      if (hist_right) {
        std::size_t mp = mid[p + 1];  // P part sits at mp-1, R part at mp
        nr.parts[mp - 1] = RulePart{rp.from, rp.to,
                                    {},
                                    detail::map_tape_word(m2.tapes[p + 1], out.tapes[mp], moved_r)};
      }
      if (hist_left) {
        std::size_t mp = mid[p];
        nr.parts[mp] = RulePart{rp.from, rp.to,
                                detail::map_tape_word(m2.tapes[p], out.tapes[mp], moved_l),
                                {}};
      }
    }
    for (std::size_t j = 1; j < m2.num_parts(); ++j) {
      if (hist_kind(m2.tapes[j].name))
        nr.domains[mid[j]] = detail::map_domain(m2.tapes[j], out.tapes[mid[j]], r.domains[j]);
      else
        nr.domains[newidx[j]] = r.domains[j];
    }
    out.rules.push_back(std::move(nr));
  }

  for (auto j : m2.input_sectors)
    out.input_sectors.push_back(hist_kind(m2.tapes[j].name) ? mid[j] : newidx[j]);
  out.finalize();
  return out;
}

// ---------------------------------------------------------------------------
// Layout of the historical triples, shared by the later stage operators

namespace detail {

struct HistTriple {
  std::size_t left = 0, mid = 0, right = 0;  // flank, content, flank sectors
  bool doubled = false;
};

inline std::vector<HistTriple> hist_triples(const Machine& m) {
  std::vector<HistTriple> out;
  for (std::size_t j = 1; j < m.num_slots(); ++j) {
    const std::string& nm = name_of(m.tapes[j].name);
    if (nm.rfind("HM''", 0) == 0)
      out.push_back({j - 1, j, j + 1, true});
    else if (nm.rfind("HM'", 0) == 0)
      out.push_back({j - 1, j, j + 1, false});
  }
  for (const auto& t : out) {
    if (name_of(m.tapes[t.left].name).rfind("HL", 0) != 0 ||
        name_of(m.tapes[t.right].name).rfind("HR", 0) != 0)
      throw std::invalid_argument("operand historical sectors are not split");
    if (m.tapes[t.mid].size() != m.tapes[t.left].size() ||
        m.tapes[t.mid].size() != m.tapes[t.right].size())
      throw std::invalid_argument("historical triple alphabets disagree");
  }
  if (out.empty()) throw std::invalid_argument("operand has no historical sectors");
  return out;
}

inline std::vector<std::size_t> word_inputs(const Machine& m) {
  std::vector<std::size_t> out;
  for (auto j : m.input_sectors)
    if (name_of(m.tapes[j].name).rfind("HM'", 0) != 0) out.push_back(j);
  std::sort(out.begin(), out.end());
  return out;
}

// one-letter parts (the {t} part) stay fixed through every stage
inline void extend_parts(Machine& m, const std::vector<std::string>& extra) {
  for (Part& p : m.parts) {
    if (p.letters.size() == 1) continue;
    std::vector<std::string> ls;
    for (auto sym : p.letters.letters) ls.push_back(name_of(sym));
    ls.insert(ls.end(), extra.begin(), extra.end());
    p.letters = Alphabet(name_of(p.letters.name), ls);
  }
}

inline Rule fixed_rule(const Machine& m, const std::string& name, const std::string& step,
                       std::uint32_t state) {
  Rule r;
  r.name = name;
  r.step = step;
  r.parts.resize(m.num_parts());
  r.domains.assign(m.num_slots(), SectorDomain{SectorDomain::Locked, {}});
  for (std::size_t p = 0; p < m.num_parts(); ++p) {
    std::uint32_t s = m.parts[p].letters.size() == 1 ? m.parts[p].letters.letters[0] : state;
    r.parts[p] = RulePart{s, s, {}, {}};
  }
  return r;
}

inline Rule switch_rule(const Machine& m, const std::string& name, const std::string& step,
                        const std::vector<std::uint32_t>& from, const std::vector<std::uint32_t>& to) {
  Rule r;
  r.name = name;
  r.step = step;
  r.parts.resize(m.num_parts());
  r.domains.assign(m.num_slots(), SectorDomain{SectorDomain::Locked, {}});
  for (std::size_t p = 0; p < m.num_parts(); ++p) r.parts[p] = RulePart{from[p], to[p], {}, {}};
  return r;
}

inline std::vector<std::uint32_t> uniform_states(const Machine& m, std::uint32_t sym) {
  std::vector<std::uint32_t> out(m.num_parts());
  for (std::size_t p = 0; p < m.num_parts(); ++p)
    out[p] = m.parts[p].letters.size() == 1 ? m.parts[p].letters.letters[0] : sym;
  return out;
}

inline std::vector<std::uint32_t> current_ends(const Machine& m) {
  std::vector<std::uint32_t> out(m.num_parts());
  for (std::size_t p = 0; p < m.num_parts(); ++p) out[p] = stage_end(m, p);
  return out;
}

inline std::vector<std::uint32_t> current_starts(const Machine& m) {
  std::vector<std::uint32_t> out(m.num_parts());
  for (std::size_t p = 0; p < m.num_parts(); ++p) out[p] = stage_start(m, p);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// M3: a 2k-phase shuttle over the right historical copies.  Odd phases move
// the primed middles out to the right flanks (and the double-primed left
// flanks in to the middles), even phases move everything back; connecting
// rules chi_j lock whichever sectors just emptied.

inline Machine append_primitive_stage(const Machine& m, std::size_t k) {
  if (k < 1) throw std::invalid_argument("primitive stage wants k >= 1");
  auto phi = phi_names(m);
  auto triples = detail::hist_triples(m);
  const std::size_t F = phi.size();

  Machine out = m;
  out.name += "p";
  auto old_end = detail::current_ends(out);
  std::vector<std::string> extra;
  for (std::size_t j = 1; j <= 2 * k; ++j) extra.push_back("4.p" + std::to_string(j));
  detail::extend_parts(out, extra);
  for (Part& p : out.parts)
    if (p.letters.size() > 1) p.end = intern("4.p" + std::to_string(2 * k));

  {
    Rule s = detail::switch_rule(out, "sigma(34)", "34", old_end,
                                 detail::uniform_states(out, intern("4.p1")));
    for (const auto& t : triples) {
      SectorDomain d{SectorDomain::Subset, {}};
      for (std::size_t x = F; x < 2 * F; ++x) d.letters.push_back(out.tapes[t.mid].letters[x]);
      s.domains[t.mid] = d;
    }
    out.rules.push_back(std::move(s));
  }

  for (std::size_t j = 1; j <= 2 * k; ++j) {
    bool odd = j % 2 == 1;
    for (std::size_t x = 0; x < F; ++x) {
      Rule r = detail::fixed_rule(out, "pi" + std::to_string(j) + "(" + phi[x] + ")", "4",
                                  intern("4.p" + std::to_string(j)));
      for (const auto& t : triples) {
        // the acting part sits between the two sectors the phase shuttles:
        // R' for the primed triples, P'' for the double-primed ones
        std::size_t act = t.doubled ? t.mid - 1 : t.mid;
        std::size_t ls = act, rs = act + 1;
        r.parts[act].left = Word{out.tapes[ls].at(F + x, odd ? -1 : 1)};
        r.parts[act].right = Word{out.tapes[rs].at(F + x, odd ? 1 : -1)};
        r.domains[ls] = SectorDomain{SectorDomain::Full, {}};
        r.domains[rs] = SectorDomain{SectorDomain::Full, {}};
      }
      out.rules.push_back(std::move(r));
    }
    if (j < 2 * k) {
      Rule c = detail::switch_rule(out, "chi" + std::to_string(j), "4",
                                   detail::uniform_states(out, intern("4.p" + std::to_string(j))),
                                   detail::uniform_states(out, intern("4.p" + std::to_string(j + 1))));
      for (const auto& t : triples) {
        // after an odd phase the middles are empty, after an even one the
        // loaded flanks are; the connecting rule locks the empty pair
        std::size_t open = odd ? (t.doubled ? t.left : t.right) : t.mid;
        c.domains[open] = SectorDomain{SectorDomain::Full, {}};
        if (!odd) {
          // middles reload on even phases; both stay open
        }
      }
      out.rules.push_back(std::move(c));
    }
  }
  out.finalize();
  return out;
}

// ---------------------------------------------------------------------------
// M4: one further state per part plus eraser rules that multiply the primed
// middles on the right and the double-primed middles on the left, so running
// the copy of H^-1 wipes the recorded history.

inline Machine append_eraser_stage(const Machine& m) {
  auto phi = phi_names(m);
  auto triples = detail::hist_triples(m);
  const std::size_t F = phi.size();

  Machine out = m;
  out.name += "e";
  auto old_end = detail::current_ends(out);
  detail::extend_parts(out, {"5.o"});
  for (Part& p : out.parts)
    if (p.letters.size() > 1) p.end = intern("5.o");

  {
    Rule s = detail::switch_rule(out, "sigma(45)", "45", old_end,
                                 detail::uniform_states(out, intern("5.o")));
    for (const auto& t : triples) {
      SectorDomain d{SectorDomain::Subset, {}};
      for (std::size_t x = F; x < 2 * F; ++x) d.letters.push_back(out.tapes[t.mid].letters[x]);
      s.domains[t.mid] = d;
    }
    out.rules.push_back(std::move(s));
  }

  for (std::size_t x = 0; x < F; ++x) {
    Rule r = detail::fixed_rule(out, "erase(" + phi[x] + ")", "5", intern("5.o"));
    for (const auto& t : triples) {
      if (t.doubled)
        r.parts[t.mid - 1].right = Word{out.tapes[t.mid].at(F + x, -1)};
      else
        r.parts[t.mid].left = Word{out.tapes[t.mid].at(F + x, 1)};
      r.domains[t.mid] = SectorDomain{SectorDomain::Full, {}};
    }
    out.rules.push_back(std::move(r));
  }
  out.finalize();
  return out;
}

// ---------------------------------------------------------------------------
// bar-M4: close the base with a one-letter part {t}; both new sectors have
// empty tapes and every rule locks them.

inline Machine make_cyclic(const Machine& m) {
  if (m.cyclic) throw std::invalid_argument("operand is already cyclic");
  Machine out;
  out.name = m.name + "c";
  out.cyclic = true;
  out.parts.push_back(Part{Alphabet("T", {"t"}), intern("t"), intern("t")});
  for (const Part& p : m.parts) out.parts.push_back(p);
  out.tapes.push_back(Alphabet(out.name + "-wrap", {}));
  out.tapes.push_back(Alphabet(out.name + "-tq", {}));
  for (std::size_t j = 1; j < m.num_slots(); ++j) out.tapes.push_back(m.tapes[j]);
  for (const Rule& r : m.rules) {
    Rule nr;
    nr.name = r.name;
    nr.step = r.step;
    nr.branch = r.branch;
    nr.parts.push_back(RulePart{intern("t"), intern("t"), {}, {}});
    for (const RulePart& rp : r.parts) nr.parts.push_back(rp);
    nr.domains.assign(2, SectorDomain{SectorDomain::Locked, {}});
    for (std::size_t j = 1; j < m.num_slots(); ++j) nr.domains.push_back(r.domains[j]);
    out.rules.push_back(std::move(nr));
  }
  for (auto j : m.input_sectors) out.input_sectors.push_back(j + 1);
  out.finalize();
  return out;
}

// ---------------------------------------------------------------------------
// M5: a leading two-phase pass over the left historical copies, mirroring the
// appended stage (the acting parts are P' and R''), except that the word
// input sectors stay open with a full domain for every new rule.

inline Machine prepend_primitive_stage(const Machine& m) {
  auto phi = phi_names(m);
  auto triples = detail::hist_triples(m);
  auto inputs = detail::word_inputs(m);
  const std::size_t F = phi.size();

  Machine out = m;
  out.name += "r";
  auto old_start = detail::current_starts(out);
  detail::extend_parts(out, {"0.p1", "0.p2"});
  auto open_inputs = [&](Rule& r) {
    for (auto j : inputs) r.domains[j] = SectorDomain{SectorDomain::Full, {}};
  };

  for (std::size_t j = 1; j <= 2; ++j) {
    bool odd = j == 1;
    for (std::size_t x = 0; x < F; ++x) {
      Rule r = detail::fixed_rule(out, "pre" + std::to_string(j) + "(" + phi[x] + ")", "0",
                                  intern("0.p" + std::to_string(j)));
      for (const auto& t : triples) {
        std::size_t act = t.doubled ? t.mid : t.mid - 1;  // R'' resp. P'
        std::size_t ls = act, rs = act + 1;
        r.parts[act].left = Word{out.tapes[ls].at(x, odd ? 1 : -1)};
        r.parts[act].right = Word{out.tapes[rs].at(x, odd ? -1 : 1)};
        r.domains[ls] = SectorDomain{SectorDomain::Full, {}};
        r.domains[rs] = SectorDomain{SectorDomain::Full, {}};
      }
      open_inputs(r);
      out.rules.push_back(std::move(r));
    }
  }
  {
    Rule c = detail::switch_rule(out, "chi0", "0", detail::uniform_states(out, intern("0.p1")),
                                 detail::uniform_states(out, intern("0.p2")));
    for (const auto& t : triples)
      c.domains[t.doubled ? t.right : t.left] = SectorDomain{SectorDomain::Full, {}};
    open_inputs(c);
    out.rules.push_back(std::move(c));
  }
  {
    Rule s = detail::switch_rule(out, "sigma(01)", "01", detail::uniform_states(out, intern("0.p2")),
                                 old_start);
    for (const auto& t : triples) s.domains[t.mid] = SectorDomain{SectorDomain::Full, {}};
    open_inputs(s);
    out.rules.push_back(std::move(s));
  }
  for (Part& p : out.parts)
    if (p.letters.size() > 1) p.start = intern("0.p1");
  out.finalize();
  return out;
}

// ---------------------------------------------------------------------------
// M6: L coordinate copies of a cyclic machine, every rule acting on all
// copies at once.  With lock_special the first copy's word input sector is
// locked by every rule (and the rules' writes there are dropped), which is
// what lets the machine accept configurations with that sector erased.

inline Machine parallelize(const Machine& m, std::size_t L, bool lock_special) {
  if (!m.cyclic) throw std::invalid_argument("parallelize wants a cyclic machine");
  if (L < 2) throw std::invalid_argument("parallelize wants L >= 2");
  const std::size_t Pc = m.num_parts();

  Machine out;
  out.name = m.name + "x" + std::to_string(L) + (lock_special ? "J" : "");
  out.cyclic = true;

  auto suffixed = [](const Alphabet& a, std::size_t c) {
    std::vector<std::string> ls;
    for (auto sym : a.letters) ls.push_back(name_of(sym));
    return Alphabet(name_of(a.name) + "(" + std::to_string(c) + ")", ls);
  };

  for (std::size_t c = 1; c <= L; ++c)
    for (std::size_t p = 0; p < Pc; ++p)
      out.parts.push_back(
          Part{suffixed(m.parts[p].letters, c), m.parts[p].start, m.parts[p].end});
  for (std::size_t c = 1; c <= L; ++c) {
    out.tapes.push_back(suffixed(m.tapes[0], c));  // copy boundary, empty
    for (std::size_t j = 1; j < Pc; ++j) out.tapes.push_back(suffixed(m.tapes[j], c));
  }

  std::vector<std::size_t> special;  // copy 1's word inputs
  for (auto j : detail::word_inputs(m)) special.push_back(j);

  for (const Rule& r : m.rules) {
    Rule nr;
    nr.name = r.name;
    nr.step = r.step;
    nr.branch = r.branch;
    nr.parts.reserve(L * Pc);
    nr.domains.assign(L * Pc, SectorDomain{SectorDomain::Locked, {}});
    for (std::size_t c = 1; c <= L; ++c) {
      std::size_t base = (c - 1) * Pc;
      for (std::size_t p = 0; p < Pc; ++p) {
        RulePart rp = r.parts[p];
        auto remap = [&](Word& w, std::size_t local) {
          for (Letter& l : w)
            l.alph = intern(name_of(m.tapes[local].name) + "(" + std::to_string(c) + ")");
        };
        remap(rp.left, p);
        if (p + 1 < Pc) remap(rp.right, p + 1);
        nr.parts.push_back(std::move(rp));
      }
      for (std::size_t j = 1; j < Pc; ++j) nr.domains[base + j] = r.domains[j];
      if (lock_special && c == 1)
        for (auto j : special) {
          nr.domains[base + j] = SectorDomain{SectorDomain::Locked, {}};
          nr.parts[base + j].left.clear();
          nr.parts[base + j - 1].right.clear();
        }
    }
    out.rules.push_back(std::move(nr));
  }

  for (std::size_t c = 1; c <= L; ++c)
    for (auto j : m.input_sectors) out.input_sectors.push_back((c - 1) * Pc + j);
  out.finalize();
  return out;
}

// ---------------------------------------------------------------------------
// M: both parallel machines behind fresh start/end states.  sigma(s)_i locks
// everything except the input sectors (historical domains restricted to the
// left copies), runs a branch, and sigma(a)_i locks everything.

inline Machine main_machine(const Machine& m61, const Machine& m62) {
  if (m61.num_parts() != m62.num_parts() || m61.rules.size() != m62.rules.size())
    throw std::invalid_argument("branch machines disagree");
  Machine out;
  out.name = "M";
  out.cyclic = true;
  const std::size_t NP = m61.num_parts();

  for (std::size_t p = 0; p < NP; ++p) {
    const Part& src = m61.parts[p];
    if (src.letters.size() == 1) {
      out.parts.push_back(src);
      continue;
    }
    std::vector<std::string> ls = {"st", "en"};
    for (auto sym : src.letters.letters) ls.push_back("b1." + name_of(sym));
    for (auto sym : m62.parts[p].letters.letters) ls.push_back("b2." + name_of(sym));
    out.parts.push_back(Part{Alphabet(name_of(src.letters.name), ls), intern("st"), intern("en")});
  }
  out.tapes = m61.tapes;
  out.input_sectors = m61.input_sectors;

  std::vector<std::size_t> winputs = detail::word_inputs(m61);
  std::vector<std::size_t> hinputs;
  for (auto j : m61.input_sectors)
    if (std::find(winputs.begin(), winputs.end(), j) == winputs.end()) hinputs.push_back(j);

  auto lift = [&](std::size_t p, int b, std::uint32_t sym) {
    return out.parts[p].letters.size() == 1
               ? sym
               : intern("b" + std::to_string(b) + "." + name_of(sym));
  };

  for (int b = 1; b <= 2; ++b) {
    const Machine& br = b == 1 ? m61 : m62;
    std::string bs = std::to_string(b);
    {
      Rule s;
      s.name = "sigma(s)" + bs;
      s.step = "s_" + bs;
      s.branch = b;
      s.parts.resize(NP);
      s.domains.assign(NP, SectorDomain{SectorDomain::Locked, {}});
      for (std::size_t p = 0; p < NP; ++p) {
        std::uint32_t st = out.parts[p].letters.size() == 1 ? out.parts[p].letters.letters[0]
                                                            : intern("st");
        s.parts[p] = RulePart{st, lift(p, b, detail::stage_start(br, p)), {}, {}};
      }
      for (std::size_t i = 0; i < winputs.size(); ++i) {
        if (b == 2 && i == 0) continue;  // the special input stays locked
        s.domains[winputs[i]] = SectorDomain{SectorDomain::Full, {}};
      }
      for (auto j : hinputs) {
        SectorDomain d{SectorDomain::Subset, {}};
        std::size_t F = out.tapes[j].size() / 2;
        for (std::size_t x = 0; x < F; ++x) d.letters.push_back(out.tapes[j].letters[x]);
        s.domains[j] = d;
      }
      out.rules.push_back(std::move(s));
    }
    for (const Rule& r : br.rules) {
      Rule nr;
      nr.name = bs + "." + r.name;
      nr.step = r.step + "_" + bs;
      nr.branch = b;
      nr.parts.resize(NP);
      nr.domains = r.domains;
      for (std::size_t p = 0; p < NP; ++p) {
        nr.parts[p] = r.parts[p];
        nr.parts[p].from = lift(p, b, r.parts[p].from);
        nr.parts[p].to = lift(p, b, r.parts[p].to);
      }
      out.rules.push_back(std::move(nr));
    }
    {
      Rule a;
      a.name = "sigma(a)" + bs;
      a.step = "a_" + bs;
      a.branch = b;
      a.parts.resize(NP);
      a.domains.assign(NP, SectorDomain{SectorDomain::Locked, {}});
      for (std::size_t p = 0; p < NP; ++p) {
        std::uint32_t en = out.parts[p].letters.size() == 1 ? out.parts[p].letters.letters[0]
                                                            : intern("en");
        a.parts[p] = RulePart{lift(p, b, detail::stage_end(br, p)), en, {}, {}};
      }
      out.rules.push_back(std::move(a));
    }
  }
  out.finalize();
  return out;
}

// ---------------------------------------------------------------------------
// Step label inventories

inline std::set<std::string> step_labels(const Machine& m) {
  std::set<std::string> out;
  for (const Rule& r : m.rules) out.insert(r.step.empty() ? r.name : r.step);
  return out;
}

// adds the reversed form of two-digit transition labels, matching how step
// histories read when a transition is crossed backwards
inline std::set<std::string> step_history_alphabet(const Machine& m) {
  std::set<std::string> out = step_labels(m);
  for (const auto& s : step_labels(m))
    if (s.size() == 2 && std::isdigit(static_cast<unsigned char>(s[0])) &&
        std::isdigit(static_cast<unsigned char>(s[1])))
      out.insert(std::string{s[1], s[0]});
  return out;
}

// maximal runs of rules from one branch
inline std::size_t ell(const Machine& m, const History& h) {
  std::size_t runs = 0;
  int cur = 0;
  for (const SignedRule& sr : h) {
    int b = m.rules[sr.index].branch;
    if (b != 0 && b != cur) ++runs;
    cur = b;
  }
  return runs;
}

// ---------------------------------------------------------------------------
// Parameter chain.  Values are validated against the recorded lower-bound
// expressions in their predecessors; checkers that consume a bound name it.

struct ParamBound {
  std::string name, constraint, used_by;
  double required = 0, value = 0;
  bool ok = false;
};

struct ParamChain {
  std::size_t k = 1, L = 8, N = 0, K0 = 0;
  double M = 1, C = 2, lam_inv = 3;
  double c0 = 0, c1 = 0, c2 = 0, c3 = 0, c4 = 0, c5 = 0;
  double L0 = 0, K = 0, J = 0, delta_inv = 0;
  double C1 = 0, C2 = 0, C3 = 0, C4 = 0;
  double N1 = 0, N2 = 0, N3 = 0, N4 = 0;
  std::vector<ParamBound> audit;

  bool ok() const {
    for (const auto& b : audit)
      if (!b.ok) return false;
    return !audit.empty();
  }
};

inline ParamChain validate_chain(ParamChain v) {
  v.audit.clear();
  auto chk = [&](const std::string& name, double value, double req, const std::string& cons,
                 const std::string& used) {
    v.audit.push_back({name, cons, used, req, value, value >= req});
  };
  chk("M", v.M, 1, "M >= 1", "blow-up piece count");
  chk("C", v.C, std::max(2.0, v.M + 1), "C >= max(2, M+1)", "order only");
  chk("lambda^-1", v.lam_inv, v.C + 1, "lambda^-1 >= C+1", "order only");
  chk("k", static_cast<double>(v.k), 1, "k >= 1", "primitive stage width, accept padding");
  chk("N", static_cast<double>(v.N), 2, "N >= 2", "standard base length of the cyclic machine");
  double c0req = std::max({9.0, 128.0, static_cast<double>(v.k) + 1, 4096.0 * v.N});
  chk("c0", v.c0, c0req, "c0 >= max(9, 128, k+1, 4096N)", "stage a-length and time bounds");
  chk("c1", v.c1, 2 * std::pow(v.c0, 4), "c1 >= 2 c0^4", "faulty-base a-length bounds");
  chk("c2", v.c2, v.c1 + 1, "c2 >= c1+1", "order only");
  chk("c3", v.c3, v.c2 + 1, "c3 >= c2+1", "order only");
  chk("c4", v.c4, v.c3 + 1, "c4 >= c3+1", "order only");
  chk("c5", v.c5, v.c4 + 1, "c5 >= c4+1", "order only");
  chk("L0", v.L0, v.N + 1, "L0 >= N+1", "component window");
  chk("L", static_cast<double>(v.L), 8, "L >= 8", "coordinate copy count");
  chk("K0", static_cast<double>(v.K0), 22.0 * v.L + 1, "K0 = 22L+1", "tight base width");
  if (v.K0 != 22 * v.L + 1) v.audit.back().ok = false;
  chk("K", v.K, 2.0 * v.K0, "K >= 2 K0", "comb width");
  chk("J", v.J, v.K + 1, "J >= K+1", "order only");
  chk("delta^-1", v.delta_inv, 16.0 * v.N * v.L * v.L0, "delta^-1 >= 16 N L L0",
      "a-length discount");
  chk("C1", v.C1, v.c0 * v.K0, "C1 >= c0 K0", "comb weight");
  chk("C2", v.C2, v.C1 * v.c0 * v.K0, "C2 >= C1 c0 K0", "comb weight");
  chk("C3", v.C3, v.C2 + 1, "C3 >= C2+1", "order only");
  chk("C4", v.C4, v.C3 + 1, "C4 >= C3+1", "order only");
  chk("N1", v.N1, v.C4 + 1, "N1 >= C4+1", "order only");
  chk("N2", v.N2, v.N1 + 1, "N2 >= N1+1", "order only");
  chk("N3", v.N3, v.N2 + 1, "N3 >= N2+1", "order only");
  chk("N4", v.N4, v.N3 + 1, "N4 >= N3+1", "order only");
  return v;
}

inline ParamChain smallest_chain(std::size_t k, std::size_t L, std::size_t N) {
  ParamChain v;
  v.k = k;
  v.L = L;
  v.N = N;
  v.M = 1;
  v.C = 2;
  v.lam_inv = 3;
  v.c0 = std::max({9.0, 128.0, static_cast<double>(k) + 1, 4096.0 * N});
  v.c1 = 2 * std::pow(v.c0, 4);
  v.c2 = v.c1 + 1;
  v.c3 = v.c2 + 1;
  v.c4 = v.c3 + 1;
  v.c5 = v.c4 + 1;
  v.L0 = N + 1;
  v.K0 = 22 * L + 1;
  v.K = 2.0 * v.K0;
  v.J = v.K + 1;
  v.delta_inv = 16.0 * N * L * v.L0;
  v.C1 = v.c0 * v.K0;
  v.C2 = v.C1 * v.c0 * v.K0;
  v.C3 = v.C2 + 1;
  v.C4 = v.C3 + 1;
  v.N1 = v.C4 + 1;
  v.N2 = v.N1 + 1;
  v.N3 = v.N2 + 1;
  v.N4 = v.N3 + 1;
  return validate_chain(v);
}

// ---------------------------------------------------------------------------
// A finite-language recognizer: one chain of states per word, consuming the
// input from the right.  Accepts exactly the given reduced nonempty words.

inline Machine build_finite_recognizer(const std::string& name, const Alphabet& X,
                                       const std::vector<Word>& words) {
  if (words.empty()) throw std::invalid_argument("recognizer wants at least one word");
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i].empty() || !is_reduced(words[i]))
      throw std::invalid_argument("recognizer words must be reduced and nonempty");
    for (std::size_t j = i + 1; j < words.size(); ++j)
      if (words[i] == words[j]) throw std::invalid_argument("recognizer words must be distinct");
  }
  MachineBuilder mb(name);
  mb.part("A0", {"s0", "e0"}, "s0", "e0");
  std::vector<std::string> chain = {"s1"};
  for (std::size_t i = 0; i < words.size(); ++i)
    for (std::size_t j = 1; j < words[i].size(); ++j)
      chain.push_back("w" + std::to_string(i) + "_" + std::to_string(j));
  chain.push_back("e1");
  mb.part("A1", chain, "s1", "e1");
  std::vector<std::string> xs;
  for (auto sym : X.letters) xs.push_back(name_of(sym));
  Alphabet t1("Xr", xs);
  mb.tape(1, t1);
  mb.inputs({1});
  for (std::size_t i = 0; i < words.size(); ++i) {
    const Word& w = words[i];
    const std::size_t t = w.size();
    for (std::size_t j = 1; j <= t; ++j) {
      auto r = mb.rule("eat(" + std::to_string(i) + "," + std::to_string(j) + ")");
      r.map(0, "s0", j == t ? "e0" : "s0");
      std::string prev = j == 1 ? "s1" : "w" + std::to_string(i) + "_" + std::to_string(j - 1);
      std::string next = j == t ? "e1" : "w" + std::to_string(i) + "_" + std::to_string(j);
      r.map(1, prev, next);
      const Letter& l = w[t - j];
      r.left(1, t1.at(alph_index(X, l.sym), -l.exp));
      r.done();
    }
  }
  return mb.finish();
}

// ---------------------------------------------------------------------------
// The assembled pipeline

struct MainConfig {
  std::size_t k = 1;    // primitive stage repetition
  std::size_t L = 8;    // coordinate copies
  std::size_t pad = 0;  // extra always-parked primed parts
};

struct Pipeline {
  MoveInterface move;
  Machine clean, rec;  // rec is the accept-padded recognizer
  Machine m1, m2, m2s, m3, m4, m4c, m5, m61, m62, mm;
  Alphabet phi{"Phi", {}};
  std::vector<int> phi_stage;
  std::size_t n = 0, s = 0, k = 1, L = 8;
  ParamChain chain;
};

inline Pipeline build_pipeline(const MoveInterface& move, const Machine& s_m,
                               const MainConfig& cfg) {
  if (cfg.k < 1 || cfg.L < 8)
    throw std::invalid_argument("main pipeline wants k >= 1 and L >= 8");
  Pipeline P;
  P.move = move;
  P.k = cfg.k;
  P.L = cfg.L;

  const Alphabet& yz = move.m.tapes.at(move.last_sector);
  {
    std::vector<std::string> ys, zs;
    for (auto sym : move.y_syms) ys.push_back(name_of(sym));
    for (auto sym : move.z_syms) zs.push_back(name_of(sym));
    std::vector<std::string> order = ys;
    order.insert(order.end(), zs.begin(), zs.end());
    for (std::size_t i = 0; i < yz.size(); ++i)
      if (i >= order.size() || name_of(yz.letters[i]) != order[i])
        throw std::invalid_argument("move machine's last tape must list moving letters, then noise");
    P.clean = build_clean(Alphabet("Yc", ys), Alphabet("Zc", zs));
  }
  P.rec = pad_accept(s_m, cfg.k);

  P.n = move.m.num_parts() - 1;
  const std::size_t mparts = P.rec.num_parts() - 1;
  P.s = P.n + mparts + cfg.pad;

  ComposeSpec cs;
  cs.name = "M1";
  cs.parts = P.n + 2 * (P.s + 1);
  for (std::size_t i = 0; i < P.n; ++i) cs.part_names.push_back("Q" + std::to_string(i));
  for (std::size_t i = 0; i <= P.s; ++i) cs.part_names.push_back("Q'" + std::to_string(i));
  for (std::size_t i = 0; i <= P.s; ++i) cs.part_names.push_back("Q''" + std::to_string(i));
  cs.stages = {{&move.m, 0, "1"}, {&P.clean, P.n - 1, "2"}, {&P.rec, P.n, "3"}};
  cs.transitions.resize(2);
  cs.transitions[0].name = "sigma(12)";
  cs.transitions[0].step = "12";
  cs.transitions[0].unlocked = {P.n};
  cs.transitions[1].name = "sigma(23)";
  cs.transitions[1].step = "23";
  cs.transitions[1].unlocked = {P.n + 1};
  cs.inputs = {move.input_sector};
  P.m1 = compose(cs);

  M1Shape sh = m1_shape(P.m1);
  P.phi = Alphabet("Phi", sh.phi);
  P.phi_stage = sh.phi_stage;

  P.m2 = add_history_sectors(P.m1);
  P.m2s = split_history_sectors(P.m2);
  P.m3 = append_primitive_stage(P.m2s, cfg.k);
  P.m4 = append_eraser_stage(P.m3);
  P.m4c = make_cyclic(P.m4);
  P.m5 = prepend_primitive_stage(P.m4c);
  P.m61 = parallelize(P.m5, cfg.L, false);
  P.m62 = parallelize(P.m5, cfg.L, true);
  P.mm = main_machine(P.m61, P.m62);
  P.chain = smallest_chain(cfg.k, cfg.L, P.m4c.num_parts());
  return P;
}

inline Machine build_main(const MoveInterface& move, const Machine& s_m, const MainConfig& cfg) {
  return build_pipeline(move, s_m, cfg).mm;
}

// ---------------------------------------------------------------------------
// Configurations

// the copy of a history word over one historical alphabet
inline Word hist_word(const Alphabet& h, const Alphabet& phi, const Word& H, bool right) {
  Word out;
  for (const Letter& l : H) out.push_back(h.at(alph_index(phi, l.sym) + (right ? phi.size() : 0), l.exp));
  return out;
}

// tame input: w in every word input sector, the left copy of H in the primed
// historical inputs and of H^-1 in the double-primed ones
inline AdmissibleWord config_input(const Pipeline& P, const Machine& m, const Word& w,
                                   const Word& H, bool skip_special = false) {
  auto winputs = detail::word_inputs(m);
  std::unordered_map<std::size_t, Word> mp;
  const Alphabet& X = P.move.m.tapes.at(P.move.input_sector);
  for (std::size_t i = 0; i < winputs.size(); ++i) {
    if (skip_special && i == 0) continue;
    if (!w.empty()) mp[winputs[i]] = copy_word(X, m.tapes[winputs[i]], w);
  }
  Word Hinv = inverse(H);
  for (auto j : m.input_sectors) {
    const std::string& nm = name_of(m.tapes[j].name);
    if (nm.rfind("HM''", 0) == 0)
      mp[j] = hist_word(m.tapes[j], P.phi, Hinv, false);
    else if (nm.rfind("HM'", 0) == 0)
      mp[j] = hist_word(m.tapes[j], P.phi, H, false);
  }
  return input_configuration(m, mp);
}

inline AdmissibleWord config_I2(const Pipeline& P, const Word& w, const Word& H) {
  return config_input(P, P.m2, w, H);
}
inline AdmissibleWord config_I5(const Pipeline& P, const Word& w, const Word& H) {
  return config_input(P, P.m5, w, H);
}
inline AdmissibleWord config_I6(const Pipeline& P, const Word& w, const Word& H) {
  return config_input(P, P.m61, w, H);
}
inline AdmissibleWord config_J6(const Pipeline& P, const Word& w, const Word& H) {
  return config_input(P, P.m62, w, H, true);
}
inline AdmissibleWord config_I(const Pipeline& P, const Word& w, const Word& H) {
  return config_input(P, P.mm, w, H);
}
inline AdmissibleWord config_J(const Pipeline& P, const Word& w, const Word& H) {
  return config_input(P, P.mm, w, H, true);
}

// end configuration with the right copies of H written in the historical
// content sectors (works for the pre-split machine and the split ones)
inline AdmissibleWord config_accept_hist(const Pipeline& P, const Machine& m, const Word& H) {
  std::unordered_map<std::size_t, Word> mp;
  Word Hinv = inverse(H);
  for (std::size_t j = 1; j < m.num_slots(); ++j) {
    const std::string& nm = name_of(m.tapes[j].name);
    if (nm.rfind("HM''", 0) == 0)
      mp[j] = hist_word(m.tapes[j], P.phi, Hinv, true);
    else if (nm.rfind("HM'", 0) == 0)
      mp[j] = hist_word(m.tapes[j], P.phi, H, true);
  }
  return end_configuration(m, mp);
}

inline AdmissibleWord config_A2(const Pipeline& P, const Word& H) {
  return config_accept_hist(P, P.m2, H);
}
inline AdmissibleWord config_A3(const Pipeline& P, const Word& H) {
  return config_accept_hist(P, P.m3, H);
}

// ---------------------------------------------------------------------------
// Canonical accepting histories

using RuleNames = std::vector<std::pair<std::string, int>>;

inline History to_history(const Machine& m, const RuleNames& ns, const std::string& prefix = "") {
  History h;
  for (const auto& [name, exp] : ns) h.push_back(named_rule(m, prefix + name, exp));
  return h;
}

inline RuleNames phi_rule_names(const Alphabet& phi, const Word& H) {
  RuleNames out;
  for (const Letter& l : H) out.push_back({name_of(l.sym), l.exp});
  return out;
}

// stage-monotone factorization H = H1 H2 H3
inline std::array<Word, 3> phi_factor(const Pipeline& P, const Word& H) {
  std::array<Word, 3> out;
  int cur = 1;
  for (const Letter& l : H) {
    int st = P.phi_stage.at(alph_index(P.phi, l.sym));
    if (st < cur) throw std::invalid_argument("history does not factor through the stages");
    cur = st;
    out[st - 1].push_back(l);
  }
  return out;
}

inline RuleNames accept_names_m1(const Pipeline& P, const Word& H) {
  auto f = phi_factor(P, H);
  RuleNames out = phi_rule_names(P.phi, f[0]);
  out.push_back({"sigma(12)", 1});
  for (auto& p : phi_rule_names(P.phi, f[1])) out.push_back(p);
  out.push_back({"sigma(23)", 1});
  for (auto& p : phi_rule_names(P.phi, f[2])) out.push_back(p);
  return out;
}

// sigma(34) plus the 2k-phase pass: odd phases run the history backwards,
// even phases forwards, with the connecting rules in between
inline RuleNames shuttle_names(const Pipeline& P, const Word& H) {
  RuleNames out = {{"sigma(34)", 1}};
  for (std::size_t j = 1; j <= 2 * P.k; ++j) {
    bool odd = j % 2 == 1;
    std::string pj = "pi" + std::to_string(j) + "(";
    if (odd)
      for (std::size_t i = H.size(); i-- > 0;) out.push_back({pj + name_of(H[i].sym) + ")", H[i].exp});
    else
      for (const Letter& l : H) out.push_back({pj + name_of(l.sym) + ")", l.exp});
    if (j < 2 * P.k) out.push_back({"chi" + std::to_string(j), 1});
  }
  return out;
}

inline RuleNames accept_names_m3(const Pipeline& P, const Word& H) {
  RuleNames out = accept_names_m1(P, H);
  for (auto& p : shuttle_names(P, H)) out.push_back(p);
  return out;
}

inline RuleNames accept_names_m4(const Pipeline& P, const Word& H) {
  RuleNames out = accept_names_m3(P, H);
  out.push_back({"sigma(45)", 1});
  for (std::size_t i = H.size(); i-- > 0;)
    out.push_back({"erase(" + name_of(H[i].sym) + ")", -H[i].exp});
  return out;
}

inline RuleNames accept_names_m5(const Pipeline& P, const Word& H) {
  RuleNames out;
  for (const Letter& l : H) out.push_back({"pre1(" + name_of(l.sym) + ")", l.exp});
  out.push_back({"chi0", 1});
  for (std::size_t i = H.size(); i-- > 0;) out.push_back({"pre2(" + name_of(H[i].sym) + ")", H[i].exp});
  out.push_back({"sigma(01)", 1});
  for (auto& p : accept_names_m4(P, H)) out.push_back(p);
  return out;
}

inline History accept_history_main(const Pipeline& P, const Word& H, int branch) {
  std::string bs = std::to_string(branch);
  History h;
  h.push_back(named_rule(P.mm, "sigma(s)" + bs));
  for (const auto& [name, exp] : accept_names_m5(P, H))
    h.push_back(named_rule(P.mm, bs + "." + name, exp));
  h.push_back(named_rule(P.mm, "sigma(a)" + bs));
  return h;
}

// the accepting history of the three-stage machine for input w, as a word
// over the positive working rules
inline Word accept_phi(const Pipeline& P, const Word& w,
                       const SearchBudget& rec_budget = {}) {
  auto mc = find_move_computation(P.move, w, SearchBudget{4 * w.size() * w.size() + 32,
                                                          4 * w.size() + 16, 2000000, SIZE_MAX});
  if (!mc) throw std::runtime_error("no moving computation found for the input");
  RuleNames out;
  for (const SignedRule& sr : mc->comp.history)
    out.push_back({P.move.m.rules[sr.index].name, sr.exp});

  Word v = copy_word(P.move.m.tapes.at(P.move.last_sector), P.clean.tapes.at(1), mc->v);
  Computation cc = cleaning(P.clean, v);
  for (const SignedRule& sr : cc.history) out.push_back({P.clean.rules[sr.index].name, sr.exp});

  Word u = copy_word(P.clean.tapes.at(2), P.rec.tapes.at(P.rec.input_sectors.at(0)),
                     clean_word(P.clean, v));
  SearchBudget rb = rec_budget;
  if (rb.max_length == 0) rb = SearchBudget{4 * u.size() + 4 * P.k + 8, 2 * u.size() + 8, 2000000, SIZE_MAX};
  auto ar = search_accept(P.rec, input_configuration(P.rec, {{P.rec.input_sectors.at(0), u}}), rb);
  if (!ar.comp) throw std::runtime_error("input word rejected by the recognizer");
  for (const SignedRule& sr : ar.comp->history)
    out.push_back({P.rec.rules[sr.index].name, sr.exp});

  Word H;
  for (const auto& [name, exp] : out) H.push_back(P.phi.at(alph_index(P.phi, intern(name)), exp));
  if (!is_reduced(H)) throw std::runtime_error("assembled history is not reduced");
  return H;
}

// ---------------------------------------------------------------------------
// Blow-up: replace each input letter by a block of M pieces.  The pieces are
// ordered so that the p-th derived rule writes the p-th letter of the block
// as seen from the sector end the original rule wrote at.

inline Alphabet blow_up_alphabet(const Alphabet& X, std::size_t M, const std::string& name) {
  std::vector<std::string> ls;
  for (auto sym : X.letters)
    for (std::size_t j = 1; j <= M; ++j) ls.push_back(std::string(name_of(sym)) + "_" + std::to_string(j));
  return Alphabet(name, ls);
}

inline Word blow_up_word(const Alphabet& X, const Alphabet& Xt, const Word& w, std::size_t M) {
  if (M <= 1) return w;
  Word out;
  for (const Letter& l : w) {
    std::size_t i = alph_index(X, l.sym);
    if (l.exp > 0)
      for (std::size_t j = 1; j <= M; ++j) out.push_back(Xt.at(i * M + j - 1, 1));
    else
      for (std::size_t j = M; j >= 1; --j) out.push_back(Xt.at(i * M + j - 1, -1));
  }
  return out;
}

inline Machine blow_up_machine(const Machine& s, std::size_t M) {
  if (M <= 1) return s;
  if (s.input_sectors.empty()) throw std::invalid_argument("blow-up wants an input sector");
  const std::size_t j = s.input_sectors.front();
  const Alphabet X = s.tapes.at(j);
  Machine out = s;
  out.name += "~" + std::to_string(M);
  out.tapes[j] = blow_up_alphabet(X, M, name_of(X.name) + "~");
  const Alphabet& Xt = out.tapes[j];
  out.rules.clear();

  auto map_domain = [&](const SectorDomain& d) {
    if (d.kind != SectorDomain::Subset) return d;
    SectorDomain nd{SectorDomain::Subset, {}};
    for (auto sym : d.letters) {
      std::size_t i = alph_index(X, sym);
      for (std::size_t p = 0; p < M; ++p) nd.letters.push_back(Xt.letters[i * M + p]);
    }
    return nd;
  };

  for (const Rule& r : s.rules) {
    const Word& al = r.parts[j].left;           // appends at the right end
    const Word& pr = r.parts[j - 1].right;      // prepends at the left end
    if (al.empty() && pr.empty()) {
      Rule nr = r;
      nr.domains[j] = map_domain(nr.domains[j]);
      out.rules.push_back(std::move(nr));
      continue;
    }
    for (std::size_t p = 1; p <= M; ++p) {
      Rule nr;
      nr.name = r.name + "~" + std::to_string(p);
      nr.step = r.step;
      nr.branch = r.branch;
      if (p == 1) {
        nr.parts = r.parts;
        nr.domains = r.domains;
        nr.domains[j] = map_domain(nr.domains[j]);
      } else {
        // later pieces only touch the input sector, at the target states
        nr.parts.resize(s.num_parts());
        for (std::size_t q = 0; q < s.num_parts(); ++q)
          nr.parts[q] = RulePart{r.parts[q].to, r.parts[q].to, {}, {}};
        nr.domains.assign(s.num_slots(), SectorDomain{SectorDomain::Full, {}});
        nr.domains[0] = SectorDomain{SectorDomain::Locked, {}};
      }
      if (!al.empty()) {
        const Letter& l = al[0];
        std::size_t i = alph_index(X, l.sym);
        std::size_t piece = l.exp > 0 ? p : M - p + 1;
        nr.parts[j].left = Word{Xt.at(i * M + piece - 1, l.exp > 0 ? 1 : -1)};
      }
      if (!pr.empty()) {
        const Letter& l = pr[0];
        std::size_t i = alph_index(X, l.sym);
        std::size_t piece = l.exp > 0 ? M - p + 1 : p;
        nr.parts[j - 1].right = Word{Xt.at(i * M + piece - 1, l.exp > 0 ? 1 : -1)};
      }
      out.rules.push_back(std::move(nr));
    }
  }
  out.finalize();
  return out;
}

}  // namespace smw
