#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "smw/build.hpp"
#include "smw/engine.hpp"

using namespace smw;

namespace {

// same dedicated machines as in test_machine.cpp
Machine sector_machine(char mode, bool swap_rule_order = false) {
  MachineBuilder mb(std::string("sector-") + mode);
  mb.part("Q0", {"q"});
  mb.part("Q1", {"r"});
  mb.tape(1, "Y1", {"a", "b"});
  Alphabet y = mb.raw().tapes[1];
  for (int k = 0; k < 2; ++k) {
    int i = swap_rule_order ? 1 - k : k;
    auto rb = mb.rule(std::string("th_") + "ab"[i]);
    if (mode == 'L')
      rb.right(0, y.at(i));
    else
      rb.left(1, y.at(i));
    rb.done();
  }
  return mb.finish();
}

AdmissibleWord wrap(const Machine& m, const Word& u) {
  Word flat{m.state(0, "q")};
  flat.insert(flat.end(), u.begin(), u.end());
  flat.push_back(m.state(1, "r"));
  return parse_admissible(m, flat);
}

// single-input-letter recognizer: erases a^k then finishes on the empty tape
Machine eraser() {
  MachineBuilder mb("eraser");
  mb.part("P0", {"s0", "f0"}, "s0", "f0");
  mb.part("P1", {"s1", "f1"}, "s1", "f1");
  mb.tape(1, "Y1", {"a"});
  mb.inputs({1});
  Alphabet y = mb.raw().tapes[1];
  {
    auto rb = mb.rule("delta");
    rb.fix(0, "s0").fix(1, "s1").left(1, y.at(0, -1));
    rb.done();
  }
  {
    auto rb = mb.rule("fin");
    rb.map(0, "s0", "f0").map(1, "s1", "f1").lock(1);
    rb.done();
  }
  return mb.finish();
}

}  // namespace

TEST_CASE("breadth-first search finds shortest computations", "[engine]") {
  Machine m = sector_machine('L');
  const Alphabet& y = m.tapes[1];
  // oracle: the one-letter multiplication machine needs exactly
  // ||red(ut u0^-1)|| steps between endpoints
  for (const Word& u0 : reduced_words(y, 3)) {
    for (const Word& ut : reduced_words(y, 3)) {
      SearchBudget b;
      b.max_length = 8;
      b.max_a = 7;
      AcceptSearch as = search_to(m, wrap(m, u0), wrap(m, ut), b);
      REQUIRE(as.comp.has_value());
      REQUIRE(as.comp->length() == reduce(concat(ut, inverse(u0))).size());
      REQUIRE(as.comp->reduced());
      REQUIRE(as.comp->end() == wrap(m, ut));
    }
  }
}

TEST_CASE("shortest search agrees with exhaustive enumeration", "[engine]") {
  // conjugation machine has many paths between the same endpoints
  Machine m = sector_machine('L');
  Word u0 = parse_word("Y1:a Y1:b");
  Word flat{m.state(0, "q")};
  flat.insert(flat.end(), u0.begin(), u0.end());
  flat.push_back(m.state(0, "q", -1));
  AdmissibleWord w0 = parse_admissible(m, flat);

  SearchBudget b;
  b.max_length = 5;
  b.max_a = 8;
  std::map<std::string, std::size_t> best;
  enumerate_reduced(m, w0, b, [&](const std::vector<AdmissibleWord>& tr, const History& h) {
    std::string k = to_string(tr.back());
    auto it = best.find(k);
    if (it == best.end() || h.size() < it->second) best[k] = h.size();
  });
  REQUIRE(best.size() > 1);
  for (const auto& [k, len] : best) {
    AcceptSearch as = search_to(m, w0, parse_admissible(m, k), b);
    REQUIRE(as.comp.has_value());
    REQUIRE(as.comp->length() == len);
  }
}

TEST_CASE("path counting matches enumeration", "[engine]") {
  for (char mode : {'L', 'R'}) {
    Machine m = sector_machine(mode);
    Word u0 = parse_word("Y1:a");
    Word flat{m.state(0, "q")};
    flat.insert(flat.end(), u0.begin(), u0.end());
    flat.push_back(m.state(0, "q", -1));
    AdmissibleWord w0 =
        mode == 'L' ? parse_admissible(m, flat) : wrap(m, u0);  // conjugation only for L
    SearchBudget b;
    b.max_length = 6;
    b.max_a = 8;
    std::unordered_map<std::string, std::uint64_t> brute;
    enumerate_reduced(m, w0, b, [&](const std::vector<AdmissibleWord>& tr, const History&) {
      ++brute[to_string(tr.back())];
    });
    for (const auto& [k, cnt] : brute) {
      CountResult cr = count_reduced_between(m, w0, parse_admissible(m, k), b);
      REQUIRE(!cr.truncated);
      REQUIRE(cr.count == cnt);
    }
  }
}

TEST_CASE("enumeration is invariant under rule reordering", "[engine]") {
  Machine m1 = sector_machine('R', false);
  Machine m2 = sector_machine('R', true);
  AdmissibleWord w1 = wrap(m1, parse_word("Y1:b"));
  AdmissibleWord w2 = wrap(m2, parse_word("Y1:b"));
  SearchBudget b;
  b.max_length = 4;
  b.max_a = 6;
  auto collect = [&](const Machine& m, const AdmissibleWord& w) {
    std::set<std::pair<std::string, std::string>> out;
    enumerate_reduced(m, w, b, [&](const std::vector<AdmissibleWord>& tr, const History& h) {
      std::string hs;
      for (const SignedRule& sr : h) hs += m.rule_of(sr).name + (sr.exp < 0 ? "-" : "+");
      out.emplace(to_string(tr.back()), hs);
    });
    return out;
  };
  REQUIRE(collect(m1, w1) == collect(m2, w2));
}

TEST_CASE("time function of the eraser recognizer", "[engine]") {
  Machine m = eraser();
  SearchBudget b;
  b.max_length = 10;
  b.max_a = 8;
  auto rows = estimate_time_function(m, 3, b);
  REQUIRE(rows.size() == 4);
  for (std::size_t n = 0; n <= 3; ++n) {
    REQUIRE(rows[n].any_accepted);
    REQUIRE(!rows[n].truncated);
    // a^n erases in n steps plus the finishing rule
    REQUIRE(rows[n].tm == n + 1);
  }
  REQUIRE(rows[0].accepted == 1);
  REQUIRE(rows[1].accepted == 3);
  REQUIRE(rows[2].accepted == 5);
  REQUIRE(rows[0].witness == "1");
  REQUIRE(rows[2].witness == "Y1:a Y1:a");

  // accept_time on a direct configuration
  AdmissibleWord w = input_configuration(m, {{1, parse_word("Y1:a Y1:a Y1:a")}});
  REQUIRE(accept_time(m, w, b) == std::size_t{4});
}

TEST_CASE("live starts cover every word a rule can fire from", "[engine]") {
  Machine m = sector_machine('L');
  const Alphabet& y = m.tapes[1];

  // base Q0 Q0^-1: oracle generates all conjugation words directly
  Base b01{BaseLetter{0, 1}, BaseLetter{0, -1}};
  auto live = live_starts(m, b01, 3);
  std::set<std::string> got;
  for (const auto& w : live) got.insert(to_string(w));
  std::set<std::string> want;
  for (const Word& u : reduced_words(y, 3)) {
    if (u.empty()) continue;  // empty gap makes q q^-1 unreduced
    Word flat{m.state(0, "q")};
    flat.insert(flat.end(), u.begin(), u.end());
    flat.push_back(m.state(0, "q", -1));
    AdmissibleWord w = parse_admissible(m, flat);
    bool fires = false;
    for (std::size_t i = 0; i < m.rules.size(); ++i)
      for (int e : {1, -1})
        if (applicable(m, SignedRule{i, e}, w)) fires = true;
    if (fires) want.insert(to_string(w));
  }
  REQUIRE(got == want);
  REQUIRE(!got.empty());

  // a locking rule only fires from the empty sector
  MachineBuilder mb("locker");
  mb.part("Q0", {"q"});
  mb.part("Q1", {"r"});
  mb.tape(1, "Y1", {"a"});
  {
    auto rb = mb.rule("sigma");
    rb.lock(1);
    rb.done();
  }
  Machine lk = mb.finish();
  auto ls = live_starts(lk, Base{BaseLetter{0, 1}, BaseLetter{1, 1}}, 3);
  REQUIRE(ls.size() == 1);
  REQUIRE(to_string(ls[0]) == "Q0:q Q1:r");
}

TEST_CASE("admissible base enumeration on a two-part machine", "[engine]") {
  Machine m = sector_machine('L');
  auto bases = enumerate_admissible_bases(m, 3);
  // four singletons plus the four admissible pairs; nothing extends to length 3
  REQUIRE(bases.size() == 8);
  std::set<std::string> got;
  for (const auto& b : bases) got.insert(base_to_string(m, b));
  REQUIRE(got.count("Q0 Q1"));
  REQUIRE(got.count("Q1^-1 Q0^-1"));
  REQUIRE(got.count("Q0 Q0^-1"));
  REQUIRE(got.count("Q1^-1 Q1"));
  REQUIRE(!got.count("Q1 Q0"));

  // a longer faulty base appears for a wider machine
  MachineBuilder mb("four-parts");
  mb.part("Q0", {"s"});
  mb.part("Q1", {"p"});
  mb.part("Q2", {"t"});
  mb.part("Q3", {"u"});
  for (std::size_t j = 1; j <= 3; ++j) mb.tape(j, "T" + std::to_string(j), {"x"});
  Machine m4 = mb.finish();
  auto bases4 = enumerate_admissible_bases(m4, 5);
  bool found = false;
  for (const auto& b : bases4)
    if (base_to_string(m4, b) == "Q1 Q2 Q2^-1 Q1^-1 Q1") found = true;
  REQUIRE(found);
}

TEST_CASE("budget truncation is reported", "[engine]") {
  Machine m = sector_machine('L');
  AdmissibleWord w0 = wrap(m, Word{});
  SearchBudget tiny;
  tiny.max_length = 10;
  tiny.max_a = 10;
  tiny.max_visited = 5;
  EnumStats st = enumerate_reduced(m, w0, tiny, [](const auto&, const auto&) {});
  REQUIRE(st.truncated);
  AcceptSearch as = search_to(m, w0, wrap(m, parse_word("Y1:a Y1:a Y1:a Y1:a")), tiny);
  REQUIRE(as.truncated);
  REQUIRE(!as.comp.has_value());
}
