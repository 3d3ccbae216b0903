// Bounded exhaustive search over reduced computations. Budgets are mandatory:
// reachable sets are typically infinite, so every routine takes a SearchBudget
// and reports whether it was truncated by one of the caps.
#ifndef SMW_ENGINE_HPP
#define SMW_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <limits>

#include "smw/machine.hpp"

namespace smw {

struct SearchBudget {
  std::size_t max_length = 0;  // T: computation length cap
  std::size_t max_a = std::numeric_limits<std::size_t>::max();  // A: a-length cap per word
  std::size_t max_visited = 50'000'000;  // node-expansion cap
  std::size_t start_a_max = std::numeric_limits<std::size_t>::max();  // start-family cap
};

struct EnumStats {
  std::size_t visited = 0;       // rule applications performed
  std::size_t computations = 0;  // computations reported (every DFS prefix)
  std::size_t max_a_seen = 0;
  bool truncated = false;
};

// Depth-first walk over all reduced histories from w0 within the budget.
// The callback sees every computation (including the empty one) as a pair of
// shared buffers (trace, history); it must not retain references.
template <typename F>
EnumStats enumerate_reduced(const Machine& m, const AdmissibleWord& w0, const SearchBudget& b,
                            F&& cb) {
  EnumStats st;
  if (w0.a_length() > b.max_a) return st;
  std::vector<AdmissibleWord> trace{w0};
  History hist;
  st.max_a_seen = w0.a_length();

  auto rec = [&](auto&& self) -> void {
    ++st.computations;
    cb(trace, hist);
    if (hist.size() >= b.max_length) return;
    for (std::size_t idx = 0; idx < m.rules.size(); ++idx) {
      for (int e : {1, -1}) {
        SignedRule sr{idx, e};
        if (!hist.empty() && hist.back() == sr.inv()) continue;  // keep history reduced
        if (st.visited >= b.max_visited) {
          st.truncated = true;
          return;
        }
        if (!applicable(m, sr, trace.back())) continue;
        ++st.visited;
        AdmissibleWord next = apply(m, sr, trace.back()).result;
        if (next.a_length() > b.max_a) continue;
        st.max_a_seen = std::max(st.max_a_seen, next.a_length());
        trace.push_back(std::move(next));
        hist.push_back(sr);
        self(self);
        trace.pop_back();
        hist.pop_back();
      }
    }
  };
  rec(rec);
  return st;
}

// Collecting variant for small searches.
inline std::vector<Computation> collect_reduced(const Machine& m, const AdmissibleWord& w0,
                                                const SearchBudget& b) {
  std::vector<Computation> out;
  enumerate_reduced(m, w0, b,
                    [&](const std::vector<AdmissibleWord>& tr, const History& h) {
                      out.push_back(Computation{tr, h});
                    });
  return out;
}

// ---------------------------------------------------------------------------
// Counting reduced computations between two fixed words: layered path-count
// DP over (word, last rule) nodes. Exact (each history counted once) without
// enumerating individual paths.
// ---------------------------------------------------------------------------

struct CountResult {
  std::uint64_t count = 0;
  std::size_t visited = 0;
  bool truncated = false;
};

namespace detail {

inline long signed_rule_key(const SignedRule& sr) {
  return static_cast<long>(sr.index) * 2 + (sr.exp > 0 ? 0 : 1);
}

struct NodeKey {
  AdmissibleWord word;
  long last;  // signed_rule_key of the last rule, -1 at the root
  friend bool operator==(const NodeKey& a, const NodeKey& b) {
    return a.last == b.last && a.word == b.word;
  }
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const {
    return AdmissibleWordHash{}(k.word) * 1000003u + static_cast<std::size_t>(k.last + 1);
  }
};

}  // namespace detail

inline CountResult count_reduced_between(const Machine& m, const AdmissibleWord& w0,
                                         const AdmissibleWord& wt, const SearchBudget& b) {
  CountResult res;
  if (w0.a_length() > b.max_a) return res;
  using Layer = std::unordered_map<detail::NodeKey, std::uint64_t, detail::NodeKeyHash>;
  Layer layer;
  layer[detail::NodeKey{w0, -1}] = 1;
  if (w0 == wt) res.count += 1;
  for (std::size_t depth = 1; depth <= b.max_length && !layer.empty(); ++depth) {
    Layer next;
    for (const auto& [key, cnt] : layer) {
      for (std::size_t idx = 0; idx < m.rules.size(); ++idx) {
        for (int e : {1, -1}) {
          SignedRule sr{idx, e};
          if (key.last == detail::signed_rule_key(sr.inv())) continue;
          if (res.visited >= b.max_visited) {
            res.truncated = true;
            return res;
          }
          if (!applicable(m, sr, key.word)) continue;
          ++res.visited;
          AdmissibleWord w = apply(m, sr, key.word).result;
          if (w.a_length() > b.max_a) continue;
          if (w == wt) res.count += cnt;
          next[detail::NodeKey{std::move(w), detail::signed_rule_key(sr)}] += cnt;
        }
      }
    }
    layer.swap(next);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Shortest accepting computation (breadth-first, dedup on words).
// ---------------------------------------------------------------------------

struct AcceptSearch {
  std::optional<Computation> comp;
  std::size_t visited = 0;
  bool truncated = false;
};

inline AcceptSearch search_to(const Machine& m, const AdmissibleWord& w0,
                              const AdmissibleWord& target, const SearchBudget& b) {
  AcceptSearch out;
  if (w0.a_length() > b.max_a) return out;
  struct Parent {
    AdmissibleWord word;
    SignedRule rule;
  };
  std::unordered_map<AdmissibleWord, Parent, AdmissibleWordHash> parent;
  std::vector<AdmissibleWord> frontier{w0};
  parent.emplace(w0, Parent{w0, SignedRule{0, 0}});

  auto reconstruct = [&](AdmissibleWord w) {
    History h;
    while (!(w == w0)) {
      const Parent& p = parent.at(w);
      h.push_back(p.rule);
      w = p.word;
    }
    std::reverse(h.begin(), h.end());
    RunResult rr = run(m, w0, h);
    out.comp = rr.comp;
  };

  if (w0 == target) {
    reconstruct(w0);
    return out;
  }
  for (std::size_t depth = 1; depth <= b.max_length && !frontier.empty(); ++depth) {
    std::vector<AdmissibleWord> next_frontier;
    for (const AdmissibleWord& w : frontier) {
      for (std::size_t idx = 0; idx < m.rules.size(); ++idx) {
        for (int e : {1, -1}) {
          SignedRule sr{idx, e};
          if (out.visited >= b.max_visited) {
            out.truncated = true;
            return out;
          }
          if (!applicable(m, sr, w)) continue;
          ++out.visited;
          AdmissibleWord v = apply(m, sr, w).result;
          if (v.a_length() > b.max_a) continue;
          if (parent.count(v)) continue;
          parent.emplace(v, Parent{w, sr});
          if (v == target) {
            reconstruct(v);
            return out;
          }
          next_frontier.push_back(std::move(v));
        }
      }
    }
    frontier.swap(next_frontier);
  }
  return out;
}

inline AcceptSearch search_accept(const Machine& m, const AdmissibleWord& w0,
                                  const SearchBudget& b) {
  return search_to(m, w0, accept_configuration(m), b);
}

// ---------------------------------------------------------------------------
// Word and start-word generators
// ---------------------------------------------------------------------------

// All reduced words over an alphabet up to a length, in length-lex order.
inline std::vector<Word> reduced_words(const Alphabet& a, std::size_t max_len) {
  std::vector<Word> out{Word{}};
  std::vector<Word> prev{Word{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<Word> cur;
    for (const Word& w : prev) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        for (int e : {1, -1}) {
          Letter l = a.at(i, e);
          if (!w.empty() && w.back().cancels(l)) continue;
          Word nw = w;
          nw.push_back(l);
          cur.push_back(std::move(nw));
        }
      }
    }
    out.insert(out.end(), cur.begin(), cur.end());
    prev.swap(cur);
  }
  return out;
}

// All words over an alphabet whose letters a given domain allows.
inline std::vector<Word> reduced_words_in_domain(const Alphabet& a, const SectorDomain& d,
                                                 std::size_t max_len) {
  if (d.locked()) return {Word{}};
  std::vector<Word> all = reduced_words(a, max_len);
  if (d.kind == SectorDomain::Full) return all;
  std::vector<Word> out;
  for (Word& w : all) {
    bool ok = true;
    for (const Letter& l : w)
      if (!d.allows(l.sym)) ok = false;
    if (ok) out.push_back(std::move(w));
  }
  return out;
}

// Every base of an admissible word of m, up to the given length: walks where
// each adjacent pair admits some sector.
inline std::vector<Base> enumerate_admissible_bases(const Machine& m, std::size_t max_len) {
  std::vector<Base> out;
  std::vector<Base> frontier;
  for (std::size_t p = 0; p < m.num_parts(); ++p)
    for (int e : {1, -1}) frontier.push_back(Base{BaseLetter{p, e}});
  for (std::size_t len = 1; len <= max_len; ++len) {
    out.insert(out.end(), frontier.begin(), frontier.end());
    if (len == max_len) break;
    std::vector<Base> next;
    for (const Base& b : frontier) {
      for (std::size_t p = 0; p < m.num_parts(); ++p) {
        for (int e : {1, -1}) {
          if (sector_between(m, b.back().part, b.back().exp, p, e)) {
            Base nb = b;
            nb.push_back(BaseLetter{p, e});
            next.push_back(std::move(nb));
          }
        }
      }
    }
    frontier.swap(next);
  }
  return out;
}

// Start words on a fixed base from which a nonempty computation can begin:
// for each signed rule, states are forced to the rule's source letters and
// each gap ranges over the rule's domain. Words admitting no rule at all only
// carry empty computations, so they are irrelevant to trace properties.
inline std::vector<AdmissibleWord> live_starts(const Machine& m, const Base& b,
                                               std::size_t start_a_max) {
  std::vector<AdmissibleWord> out;
  std::unordered_map<AdmissibleWord, bool, AdmissibleWordHash> seen;
  // resolve the sectors of the base once
  std::vector<std::size_t> secs;
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    auto s = sector_between(m, b[i].part, b[i].exp, b[i + 1].part, b[i + 1].exp);
    if (!s) return out;  // not an admissible base
    secs.push_back(*s);
  }
  for (std::size_t idx = 0; idx < m.rules.size(); ++idx) {
    for (int e : {1, -1}) {
      SignedRule sr{idx, e};
      // per-gap candidate words under this rule's domains
      std::vector<std::vector<Word>> cand;
      std::size_t budget_left = start_a_max;
      bool dead = false;
      for (std::size_t g = 0; g < secs.size(); ++g) {
        cand.push_back(reduced_words_in_domain(m.tapes[secs[g]], m.rule_domain(sr, secs[g]),
                                               budget_left));
        if (cand.back().empty()) dead = true;
      }
      if (dead) continue;
      // assemble all gap assignments with total length <= start_a_max
      std::vector<std::size_t> pick(secs.size(), 0);
      while (true) {
        std::size_t total = 0;
        for (std::size_t g = 0; g < secs.size(); ++g) total += cand[g][pick[g]].size();
        if (total <= start_a_max) {
          AdmissibleWord w;
          bool valid = true;
          Word flat;
          for (std::size_t i = 0; i < b.size(); ++i) {
            RulePart rp = m.rule_part(sr, b[i].part);
            flat.push_back(Letter{m.parts[b[i].part].letters.name, rp.from, b[i].exp});
            if (i < secs.size()) {
              const Word& gw = cand[i][pick[i]];
              flat.insert(flat.end(), gw.begin(), gw.end());
            }
          }
          if (!is_reduced(flat)) valid = false;  // e.g. q q^-1 with empty gap
          if (valid) {
            try {
              w = parse_admissible(m, flat);
            } catch (const ParseError&) {
              valid = false;
            }
          }
          if (valid && applicable(m, sr, w) && !seen.count(w)) {
            seen.emplace(w, true);
            out.push_back(std::move(w));
          }
        }
        // advance the mixed-radix picker
        std::size_t g = 0;
        while (g < pick.size() && ++pick[g] == cand[g].size()) {
          pick[g] = 0;
          ++g;
        }
        if (g == pick.size()) break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Time function
// ---------------------------------------------------------------------------

struct TimeFnRow {
  std::size_t n = 0;
  bool any_accepted = false;
  std::size_t tm = 0;           // max over accepted inputs of minimal accept time
  std::string witness;          // an input word realizing the max
  std::size_t accepted = 0;     // accepted inputs of size exactly <= n counted at this row
  bool truncated = false;
};

// Minimal accepting time per input configuration, then max per size class.
inline std::vector<TimeFnRow> estimate_time_function(const Machine& m, std::size_t n_max,
                                                     const SearchBudget& b) {
  if (m.input_sectors.empty())
    throw std::runtime_error(m.name + " is not a recognizing machine");
  std::vector<TimeFnRow> rows(n_max + 1);
  for (std::size_t n = 0; n <= n_max; ++n) rows[n].n = n;

  // enumerate input tuples over the input sectors, total length <= n_max
  std::vector<std::vector<Word>> per_sector;
  for (std::size_t j : m.input_sectors) per_sector.push_back(reduced_words(m.tape(j), n_max));
  std::vector<std::size_t> pick(per_sector.size(), 0);
  while (true) {
    std::size_t total = 0;
    for (std::size_t g = 0; g < pick.size(); ++g) total += per_sector[g][pick[g]].size();
    if (total <= n_max) {
      std::unordered_map<std::size_t, Word> inputs;
      std::string shown;
      for (std::size_t g = 0; g < pick.size(); ++g) {
        inputs[m.input_sectors[g]] = per_sector[g][pick[g]];
        if (g) shown += " | ";
        shown += to_string(per_sector[g][pick[g]]);
      }
      AdmissibleWord w = input_configuration(m, inputs);
      AcceptSearch as = search_accept(m, w, b);
      for (std::size_t n = total; n <= n_max; ++n) {
        if (as.truncated) rows[n].truncated = true;
        if (as.comp) {
          ++rows[n].accepted;
          std::size_t t = as.comp->length();
          if (!rows[n].any_accepted || t > rows[n].tm) {
            rows[n].any_accepted = true;
            rows[n].tm = t;
            rows[n].witness = shown;
          }
        }
      }
    }
    std::size_t g = 0;
    while (g < pick.size() && ++pick[g] == per_sector[g].size()) {
      pick[g] = 0;
      ++g;
    }
    if (g == pick.size() || pick.empty()) break;
  }
  return rows;
}

// Minimal accepting time of one configuration, if within budget.
inline std::optional<std::size_t> accept_time(const Machine& m, const AdmissibleWord& w,
                                              const SearchBudget& b) {
  AcceptSearch as = search_accept(m, w, b);
  if (!as.comp) return std::nullopt;
  return as.comp->length();
}

}  // namespace smw

#endif
