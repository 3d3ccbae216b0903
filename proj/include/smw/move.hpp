// Move-machine analysis: moving rules, base counts and narrowness, the
// machine axioms, and the full-base sweep behind the narrowness checks.
//
// The syntactic axioms are decided exactly; the semantic ones are checked by
// bounded enumeration, so a pass there means "no violation within the given
// budgets" and the report keeps the truncation flag next to the verdicts.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "smw/engine.hpp"
#include "smw/machine.hpp"
#include "smw/zoo.hpp"

namespace smw {

// A machine presented as a move machine: which sector is the input and which
// the last one, how the letters of the last tape project to the input letters
// (images in order, then noise), and the declared constants.
struct MoveInterface {
  Machine m;
  std::size_t input_sector = 1;
  std::size_t last_sector = 0;
  std::vector<std::uint32_t> y_syms;  // y_syms[i] projects to input letter i
  std::vector<std::uint32_t> z_syms;  // noise letters, deleted by projection
  std::string f_desc;                 // informal shape of the time bound
  std::function<std::size_t(std::size_t)> g;  // declared length bound for setup
  std::size_t C = 0;                  // noise allowance of a C-move
  std::size_t c = 2;                  // narrowness constant
  std::size_t d = 4;                  // declared a-length constant
  std::size_t k = 4;                  // declared noninput-length constant
};

inline MoveInterface move1_interface(const Machine& m) {
  MoveInterface mi;
  mi.m = m;
  mi.input_sector = 1;
  mi.last_sector = 3;
  mi.y_syms = m.tapes.at(3).letters;
  mi.f_desc = "quadratic";
  mi.g = [](std::size_t n) { return 2 * n * n + 7 * n + 1; };
  return mi;
}

// projection of a last-sector word: delete noise, send images back to the
// input alphabet; the result is not reduced
inline Word bar_word(const MoveInterface& mi, const Word& v) {
  const Alphabet& in = mi.m.tapes.at(mi.input_sector);
  Word out;
  for (const Letter& l : v) {
    auto y = std::find(mi.y_syms.begin(), mi.y_syms.end(), l.sym);
    if (y != mi.y_syms.end()) {
      out.push_back(in.at(static_cast<std::size_t>(y - mi.y_syms.begin()), l.exp));
      continue;
    }
    if (std::find(mi.z_syms.begin(), mi.z_syms.end(), l.sym) != mi.z_syms.end()) continue;
    throw std::runtime_error("letter " + name_of(l.sym) + " is neither image nor noise");
  }
  return out;
}

inline std::size_t z_count(const MoveInterface& mi, const Word& v) {
  std::size_t n = 0;
  for (const Letter& l : v)
    if (std::find(mi.z_syms.begin(), mi.z_syms.end(), l.sym) != mi.z_syms.end()) ++n;
  return n;
}

// ---------------------------------------------------------------------------
// Moving rules.  A rule moves when it multiplies the input sector on the
// right, i.e. its part just right of that sector carries a left word; a rule
// multiplying the input on the left breaks the ground assumption and makes
// the count meaningless.

inline bool is_moving_rule(const Machine&, const Rule& r, std::size_t input_sector) {
  return !r.parts.at(input_sector).left.empty();
}

inline bool multiplies_input_left(const Machine&, const Rule& r, std::size_t input_sector) {
  return !r.parts.at(input_sector - 1).right.empty();
}

inline std::size_t moving_rule_count(const MoveInterface& mi, const History& h) {
  for (const Rule& r : mi.m.rules)
    if (multiplies_input_left(mi.m, r, mi.input_sector))
      throw std::runtime_error("rule " + r.name + " multiplies the input sector on the left");
  std::size_t n = 0;
  for (const SignedRule& sr : h)
    if (is_moving_rule(mi.m, mi.m.rule_of(sr), mi.input_sector)) ++n;
  return n;
}

// occurrences of the input sector's right delimiter in a base, disregarding a
// leading positive or trailing negative one
inline std::size_t i_of_base(const MoveInterface& mi, const Base& b) {
  std::size_t part = mi.input_sector;
  std::size_t n = 0;
  for (const BaseLetter& l : b)
    if (l.part == part) ++n;
  if (!b.empty() && b.front().part == part && b.front().exp > 0) --n;
  if (!b.empty() && b.back().part == part && b.back().exp < 0) --n;
  return n;
}

struct NarrownessReport {
  std::string id;
  std::size_t base_count = 0;  // I(B)
  std::size_t moving = 0;      // moving rules in the history
  std::size_t max_ni = 0;      // larger endpoint noninput length
  bool narrow = true;
};

inline NarrownessReport is_c_narrow(const MoveInterface& mi, std::size_t c,
                                    const Computation& comp) {
  NarrownessReport r;
  r.base_count = i_of_base(mi, comp.start().base());
  r.moving = moving_rule_count(mi, comp.history);
  r.max_ni = std::max(noninput_length(mi.m, comp.start()), noninput_length(mi.m, comp.end()));
  r.narrow = r.base_count * r.moving <= c * r.max_ni;
  return r;
}

// ---------------------------------------------------------------------------
// Distinguished configurations

inline AdmissibleWord input_config(const MoveInterface& mi, const Word& w) {
  return input_configuration(mi.m, {{mi.input_sector, w}});
}

inline AdmissibleWord a_config(const MoveInterface& mi, const Word& v) {
  return end_configuration(mi.m, {{mi.last_sector, v}});
}

inline bool is_input_configuration(const MoveInterface& mi, const AdmissibleWord& w) {
  if (!(w.base() == standard_base(mi.m))) return false;
  if (!all_start_letters(mi.m, w)) return false;
  for (std::size_t i = 0; i < w.gaps.size(); ++i)
    if (w.sector[i] != mi.input_sector && !w.gaps[i].empty()) return false;
  return true;
}

// when w is an end configuration carrying only the last sector, that word
inline std::optional<Word> as_a_config(const MoveInterface& mi, const AdmissibleWord& w) {
  if (!(w.base() == standard_base(mi.m))) return std::nullopt;
  if (!all_end_letters(mi.m, w)) return std::nullopt;
  Word v;
  for (std::size_t i = 0; i < w.gaps.size(); ++i) {
    if (w.sector[i] == mi.last_sector)
      v = w.gaps[i];
    else if (!w.gaps[i].empty())
      return std::nullopt;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Move computations: input configuration of w to an end configuration whose
// last-sector word projects to w up to free reduction; a C-move projects to w
// letter for letter with bounded noise.

struct MoveComputation {
  Computation comp;
  Word v;              // terminal last-sector word
  std::size_t z = 0;   // noise letters in v
  bool c_move = false;
};

inline std::optional<MoveComputation> find_move_computation(const MoveInterface& mi, const Word& w,
                                                            const SearchBudget& budget) {
  if (!is_reduced(w)) throw std::invalid_argument("move computations want reduced words");
  auto fill = [&](Computation&& comp, Word&& v) {
    MoveComputation mc;
    mc.comp = std::move(comp);
    mc.z = z_count(mi, v);
    mc.c_move = bar_word(mi, v) == w && mc.z <= mi.C * w.size();
    mc.v = std::move(v);
    return mc;
  };
  if (mi.m.name == "Move1") {
    Word w3 = copy_word(mi.m.tapes.at(mi.input_sector), mi.m.tapes.at(mi.last_sector), w);
    Computation comp = canonical_move1_computation(mi.m, w3, w);
    return fill(std::move(comp), std::move(w3));
  }
  std::optional<MoveComputation> best;
  enumerate_reduced(mi.m, input_config(mi, w), budget,
                    [&](const std::vector<AdmissibleWord>& tr, const History& h) {
                      if (h.empty()) return;
                      auto v = as_a_config(mi, tr.back());
                      if (!v) return;
                      if (reduce(bar_word(mi, *v)) != w) return;
                      if (best && best->comp.length() <= h.size()) return;
                      best = fill(Computation{tr, h}, std::move(*v));
                    });
  return best;
}

// ---------------------------------------------------------------------------
// Full-base sweep: every admissible full base, every live start word, every
// reduced computation within the budget; checks narrowness and the declared
// a-length and noninput-length constants against every prefix, and records
// the smallest constants that would have passed.

struct SweepViolation {
  std::string kind;  // "narrow", "a-length" or "ni-length"
  std::string base;
  std::string start;
  std::size_t at = 0;  // trace index of the offending word
};

struct FullBaseReport {
  std::size_t bases = 0;
  std::size_t starts = 0;
  std::size_t comps = 0;  // enumerated computations, empty ones included
  std::size_t narrow_violations = 0;
  std::size_t d_violations = 0;
  std::size_t k_violations = 0;
  std::size_t observed_d = 0;
  std::size_t observed_k = 0;
  bool unbounded = false;  // interior length positive with both endpoints zero
  bool truncated = false;
  std::vector<SweepViolation> examples;
};

inline FullBaseReport full_base_sweep(const MoveInterface& mi, const SearchBudget& budget,
                                      std::size_t max_base_len = 0, std::size_t threads = 1) {
  const Machine& m = mi.m;
  if (max_base_len == 0) max_base_len = 2 * m.num_parts() + 1;

  struct Job {
    const Base* base;
    AdmissibleWord start;
  };
  std::vector<Base> bases;
  for (Base& b : enumerate_admissible_bases(m, max_base_len))
    if (base_is_full(classify_base(m, b))) bases.push_back(std::move(b));
  std::vector<Job> jobs;
  for (const Base& b : bases)
    for (AdmissibleWord& st : live_starts(m, b, budget.start_a_max))
      jobs.push_back(Job{&b, std::move(st)});

  FullBaseReport rep;
  rep.bases = bases.size();
  rep.starts = jobs.size();

  struct JobResult {
    std::size_t comps = 0;
    std::size_t narrow_violations = 0, d_violations = 0, k_violations = 0;
    std::size_t observed_d = 0, observed_k = 0;
    bool unbounded = false, truncated = false;
    std::vector<SweepViolation> examples;
  };
  std::vector<JobResult> results(jobs.size());

  auto work = [&](std::size_t idx) {
    const Job& job = jobs[idx];
    JobResult& out = results[idx];
    std::size_t ib = i_of_base(mi, *job.base);
    std::string base_str = base_to_string(m, *job.base);
    std::string start_str = to_string(job.start.flatten());
    // prefix maxima along the DFS stack, indexed by depth
    std::vector<std::size_t> amax, nimax, mv;
    auto note = [&](const char* kind, std::size_t at) {
      if (out.examples.size() < 2)
        out.examples.push_back(SweepViolation{kind, base_str, start_str, at});
    };
    EnumStats st = enumerate_reduced(
        m, job.start, budget, [&](const std::vector<AdmissibleWord>& tr, const History& h) {
          std::size_t depth = h.size();
          std::size_t a = tr.back().a_length();
          std::size_t ni = noninput_length(m, tr.back());
          if (depth == 0) {
            amax.assign(1, a);
            nimax.assign(1, ni);
            mv.assign(1, 0);
          } else {
            amax.resize(depth + 1);
            nimax.resize(depth + 1);
            mv.resize(depth + 1);
            amax[depth] = std::max(amax[depth - 1], a);
            nimax[depth] = std::max(nimax[depth - 1], ni);
            mv[depth] = mv[depth - 1] +
                        (is_moving_rule(m, m.rule_of(h.back()), mi.input_sector) ? 1 : 0);
          }
          ++out.comps;
          std::size_t end_a = std::max(tr.front().a_length(), a);
          std::size_t end_ni = std::max(noninput_length(m, tr.front()), ni);
          if (ib * mv[depth] > mi.c * end_ni) {
            ++out.narrow_violations;
            note("narrow", depth);
          }
          if (amax[depth] > mi.d * end_a) {
            ++out.d_violations;
            note("a-length", depth);
          }
          if (nimax[depth] > mi.k * end_ni) {
            ++out.k_violations;
            note("ni-length", depth);
          }
          if (end_a == 0)
            out.unbounded |= amax[depth] > 0;
          else
            out.observed_d = std::max(out.observed_d, (amax[depth] + end_a - 1) / end_a);
          if (end_ni == 0)
            out.unbounded |= nimax[depth] > 0;
          else
            out.observed_k = std::max(out.observed_k, (nimax[depth] + end_ni - 1) / end_ni);
        });
    out.truncated = st.truncated;
  };

  if (threads <= 1 || jobs.size() <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    auto runner = [&] {
      for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) work(i);
    };
    std::vector<std::thread> pool;
    std::size_t n = std::min(threads, jobs.size());
    pool.reserve(n);
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(runner);
    for (auto& t : pool) t.join();
  }

  // deterministic merge in job order, independent of the thread count
  for (const JobResult& jr : results) {
    rep.comps += jr.comps;
    rep.narrow_violations += jr.narrow_violations;
    rep.d_violations += jr.d_violations;
    rep.k_violations += jr.k_violations;
    rep.observed_d = std::max(rep.observed_d, jr.observed_d);
    rep.observed_k = std::max(rep.observed_k, jr.observed_k);
    rep.unbounded |= jr.unbounded;
    rep.truncated |= jr.truncated;
    for (const SweepViolation& v : jr.examples)
      if (rep.examples.size() < 4) rep.examples.push_back(v);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// The axioms.  (1) and (2) are syntactic and decided exactly; (3), (5) and
// (6) enumerate computations from small configurations; (4) is constructive;
// (7) and (8) ride on the full-base sweep.

enum class Verdict { Pass, Fail, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    default: return "inconclusive";
  }
}

struct AxiomCheck {
  Verdict verdict = Verdict::Pass;
  std::string detail;
};

struct MoveAxiomReport {
  AxiomCheck mv[8];
  std::size_t observed_d = 0;
  std::size_t observed_k = 0;
  bool truncated = false;  // some enumeration hit the node cap
};

struct MoveVerifyBudget {
  std::size_t max_input = 3;   // input words checked for (3), (4), (5)
  std::size_t max_target = 3;  // last-sector words checked for (6)
  SearchBudget search;
  std::size_t max_base_len = 0;  // 0: up to twice the part count plus one
  std::size_t threads = 1;
};

inline MoveAxiomReport verify_axioms(const MoveInterface& mi, const MoveVerifyBudget& b) {
  MoveAxiomReport rep;
  const Machine& m = mi.m;
  auto fail = [&](std::size_t i, std::string why) {
    if (rep.mv[i].verdict == Verdict::Fail) return;  // keep the first witness
    rep.mv[i] = AxiomCheck{Verdict::Fail, std::move(why)};
  };

  // (1), (2): one pass over the rules
  for (const Rule& r : m.rules) {
    if (multiplies_input_left(m, r, mi.input_sector))
      fail(0, r.name + " multiplies the input sector on the left");
    const SectorDomain& d = r.domains.at(mi.input_sector);
    bool full = d.kind == SectorDomain::Full ||
                (d.kind == SectorDomain::Subset &&
                 d.letters.size() == m.tapes.at(mi.input_sector).size());
    if (!full) fail(1, r.name + " does not leave the input sector free");
  }
  if (rep.mv[0].verdict == Verdict::Pass)
    rep.mv[0].detail = "no rule multiplies the input sector on the left";
  if (rep.mv[1].verdict == Verdict::Pass) rep.mv[1].detail = "every rule frees the input sector";

  // (3) + (5): walk out of each small input configuration once
  std::vector<Word> inputs = reduced_words(m.tapes.at(mi.input_sector), b.max_input);
  for (const Word& w : inputs) {
    EnumStats st = enumerate_reduced(
        m, input_config(mi, w), b.search,
        [&](const std::vector<AdmissibleWord>& tr, const History& h) {
          if (h.empty()) return;
          if (auto v = as_a_config(mi, tr.back())) {
            if (reduce(bar_word(mi, *v)) != w)
              fail(2, "setup from " + to_string(w) + " reaches " + to_string(*v) +
                          " which projects elsewhere");
          }
          if (is_input_configuration(mi, tr.back()))
            fail(4, "nonempty computation between input configurations, from " + to_string(w) +
                        " in " + std::to_string(h.size()) + " steps");
        });
    rep.truncated |= st.truncated;
  }
  if (rep.mv[2].verdict == Verdict::Pass)
    rep.mv[2].detail = "all setups from inputs up to length " + std::to_string(b.max_input) +
                       " project back";
  if (rep.mv[4].verdict == Verdict::Pass)
    rep.mv[4].detail = "no nonempty computation between input configurations found";

  // (4): constructive, against the declared length bound
  for (const Word& w : inputs) {
    auto mc = find_move_computation(mi, w, b.search);
    if (!mc) {
      if (rep.mv[3].verdict == Verdict::Pass)
        rep.mv[3] = AxiomCheck{Verdict::Inconclusive,
                               "no move computation found for " + to_string(w) + " in budget"};
      continue;
    }
    if (!mc->c_move)
      fail(3, "computation for " + to_string(w) + " is not a C-move");
    else if (mi.g && mc->comp.length() > mi.g(w.size()))
      fail(3, "move computation for " + to_string(w) + " takes " +
                  std::to_string(mc->comp.length()) + " steps, over the declared bound");
  }
  if (rep.mv[3].verdict == Verdict::Pass)
    rep.mv[3].detail = "C-moves within the declared bound for all inputs up to length " +
                       std::to_string(b.max_input);

  // (6): walk out of each small end configuration
  for (const Word& u : reduced_words(m.tapes.at(mi.last_sector), b.max_target)) {
    Word bu = reduce(bar_word(mi, u));
    EnumStats st = enumerate_reduced(
        m, a_config(mi, u), b.search,
        [&](const std::vector<AdmissibleWord>& tr, const History& h) {
          if (h.empty()) return;
          if (auto v = as_a_config(mi, tr.back())) {
            if (reduce(bar_word(mi, *v)) != bu)
              fail(5, "end configurations of " + to_string(u) + " and " + to_string(*v) +
                          " connected despite different projections");
          }
        });
    rep.truncated |= st.truncated;
  }
  if (rep.mv[5].verdict == Verdict::Pass)
    rep.mv[5].detail = "connected end configurations project equally, targets up to length " +
                       std::to_string(b.max_target);

  // (7) + (8): full-base sweep against the declared constants
  FullBaseReport sweep = full_base_sweep(mi, b.search, b.max_base_len, b.threads);
  rep.observed_d = sweep.observed_d;
  rep.observed_k = sweep.observed_k;
  rep.truncated |= sweep.truncated;
  if (sweep.unbounded) {
    fail(6, "interior a-length positive on a computation with empty endpoints");
    fail(7, "interior noninput length positive on a computation with empty endpoints");
  }
  if (sweep.d_violations)
    fail(6, std::to_string(sweep.d_violations) + " computations break the declared a-length bound");
  else if (rep.mv[6].verdict == Verdict::Pass)
    rep.mv[6].detail = "smallest passing constant " + std::to_string(sweep.observed_d) + " over " +
                       std::to_string(sweep.comps) + " computations";
  if (sweep.k_violations)
    fail(7, std::to_string(sweep.k_violations) +
                " computations break the declared noninput-length bound");
  else if (rep.mv[7].verdict == Verdict::Pass)
    rep.mv[7].detail = "smallest passing constant " + std::to_string(sweep.observed_k) + " over " +
                       std::to_string(sweep.comps) + " computations";
  return rep;
}

}  // namespace smw
