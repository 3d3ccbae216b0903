// Move machine analysis: the concrete mover over one and two letters, its
// canonical computations and their factorization into legs, the narrowness
// accounting, and the axiom verifier.

#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "smw/engine.hpp"
#include "smw/move.hpp"
#include "smw/zoo.hpp"

using namespace smw;

namespace {

Machine mover(std::size_t nx) {
  return build_move1(nx == 1 ? Alphabet("X", {"x"}) : Alphabet("X", {"x", "w"}));
}

std::size_t quad(std::size_t k) { return 2 * k * k + 7 * k + 1; }

}  // namespace

TEST_CASE("move interface basics") {
  Machine m = mover(2);
  MoveInterface mi = move1_interface(m);
  CHECK(mi.input_sector == 1);
  CHECK(mi.last_sector == 3);
  CHECK(mi.z_syms.empty());
  CHECK(mi.g(0) == 1);
  CHECK(mi.g(3) == quad(3));

  // projection is positionwise and drops nothing here
  Word w3 = word_in(m.tapes[3], "x_3 w_3^-1 x_3");
  Word w1 = word_in(m.tapes[1], "x_1 w_1^-1 x_1");
  CHECK(bar_word(mi, w3) == w1);
  CHECK(z_count(mi, w3) == 0);
  CHECK_THROWS(bar_word(mi, word_in(m.tapes[2], "x_2")));

  // the only moving rules are the ones carrying a letter into the input
  std::size_t moving = 0;
  for (const Rule& r : m.rules) {
    if (is_moving_rule(m, r, mi.input_sector)) ++moving;
    CHECK_FALSE(multiplies_input_left(m, r, mi.input_sector));
  }
  CHECK(moving == 2);  // theta(x), theta(w)
}

TEST_CASE("I(B) discounts a leading or trailing input delimiter") {
  Machine m = mover(1);
  MoveInterface mi = move1_interface(m);
  CHECK(i_of_base(mi, standard_base(m)) == 1);
  CHECK(i_of_base(mi, Base{{1, 1}, {2, 1}, {2, -1}, {1, -1}}) == 0);
  CHECK(i_of_base(mi, Base{{0, 1}, {1, 1}, {1, -1}, {0, -1}}) == 2);
  CHECK(i_of_base(mi, Base{{3, -1}, {2, -1}, {2, 1}, {3, 1}}) == 0);
  // the discount goes one way: a leading inverse or trailing plain letter counts
  CHECK(i_of_base(mi, Base{{1, -1}, {0, -1}, {0, 1}, {1, 1}}) == 2);
}

TEST_CASE("canonical move computations: length, terminal word, narrowness") {
  for (std::size_t nx : {1u, 2u}) {
    Machine m = mover(nx);
    MoveInterface mi = move1_interface(m);
    std::size_t wmax = nx == 1 ? 4 : 3;
    for (const Word& w : reduced_words(m.tapes[1], wmax)) {
      Word w3 = copy_word(m.tapes[1], m.tapes[3], w);
      for (const Word& v : {w, Word{}}) {
        Computation c = canonical_move1_computation(m, w3, v);
        REQUIRE(c.length() == quad(w.size()));
        REQUIRE(is_input_configuration(mi, c.start()));
        // terminal word: sector three carries the target, the input keeps
        // the unconsumed part
        REQUIRE(all_end_letters(m, c.end()));
        Word leftover = reduce(concat(v, copy_word(m.tapes[3], m.tapes[1], inverse(w3))));
        AdmissibleWord want = end_configuration(m, {{1, leftover}, {3, w3}});
        REQUIRE(c.end() == want);
        REQUIRE(moving_rule_count(mi, c.history) == w.size());

        NarrownessReport nr = is_c_narrow(mi, mi.c, c);
        REQUIRE(nr.base_count == 1);
        REQUIRE(nr.moving == w.size());
        REQUIRE(nr.narrow);
      }
    }
  }
}

TEST_CASE("canonical move computations are the only route to the a-words") {
  for (std::size_t nx : {1u, 2u}) {
    Machine m = mover(nx);
    for (const Word& w : reduced_words(m.tapes[1], 2)) {
      Word w3 = copy_word(m.tapes[1], m.tapes[3], w);
      Computation c = canonical_move1_computation(m, w3, w);
      SearchBudget b;
      b.max_length = c.length() + 2;
      b.max_a = 2 * w.size() + 6;
      CountResult cnt = count_reduced_between(m, c.start(), c.end(), b);
      REQUIRE_FALSE(cnt.truncated);
      REQUIRE(cnt.count == 1);
    }
  }
}

TEST_CASE("end histories factor into legs matching the target") {
  Machine m = mover(2);
  for (const char* spec : {"x_1", "x_1^-1", "x_1 w_1", "w_1^-1 x_1", "x_1 w_1^-1 x_1"}) {
    Word w = word_in(m.tapes[1], spec);
    Word w3 = copy_word(m.tapes[1], m.tapes[3], w);
    Computation c = canonical_move1_computation(m, w3, w);
    REQUIRE(c.history.front() == named_rule(m, "theta_sf"));
    History tail(c.history.begin() + 1, c.history.end());
    std::vector<OneLeg> legs = factor_end_history(m, tail);
    REQUIRE(legs.size() == w.size());
    // legs run in time order, consuming the target from its last letter
    for (std::size_t i = 0; i < legs.size(); ++i) {
      const Letter& l = w[w.size() - 1 - i];
      REQUIRE(legs[i].y == detail::orig_name(l.sym));
      REQUIRE(legs[i].exp == l.exp);
    }
    // a stray transition inside the tail is rejected
    History bad = tail;
    bad.push_back(named_rule(m, "theta_sf"));
    REQUIRE_THROWS(factor_end_history(m, bad));
  }
}

TEST_CASE("find_move_computation returns zero-noise C-moves") {
  Machine m = mover(2);
  MoveInterface mi = move1_interface(m);
  SearchBudget b;  // unused by the direct construction
  for (const char* spec : {"", "x_1", "w_1^-1", "x_1 w_1", "x_1 x_1"}) {
    Word w = word_in(m.tapes[1], spec);
    auto mc = find_move_computation(mi, w, b);
    REQUIRE(mc.has_value());
    REQUIRE(mc->c_move);
    REQUIRE(mc->z == 0);
    REQUIRE(mc->comp.length() == quad(w.size()));
    REQUIRE(bar_word(mi, mc->v) == w);
  }
}

TEST_CASE("find_move_computation searches when no construction applies") {
  Machine m = mover(1);
  m.name = "GenericMover";
  MoveInterface mi = move1_interface(m);
  SearchBudget b;
  b.max_length = quad(1) + 2;
  b.max_a = 6;
  Word w = word_in(m.tapes[1], "x_1");
  auto mc = find_move_computation(mi, w, b);
  REQUIRE(mc.has_value());
  REQUIRE(mc->comp.length() == quad(1));
  REQUIRE(mc->c_move);
}

TEST_CASE("full-base sweep holds the declared constants") {
  Machine m = mover(1);
  MoveInterface mi = move1_interface(m);
  SearchBudget b;
  b.max_length = 8;
  b.max_a = 6;
  b.start_a_max = 2;
  FullBaseReport rep = full_base_sweep(mi, b);
  CHECK(rep.bases > 4);  // standard plus the unreduced full shapes
  CHECK(rep.starts > 0);
  CHECK(rep.comps > 0);
  CHECK(rep.narrow_violations == 0);
  CHECK(rep.d_violations == 0);
  CHECK(rep.k_violations == 0);
  CHECK(rep.observed_d <= mi.d);
  CHECK(rep.observed_k <= mi.k);
  CHECK_FALSE(rep.unbounded);
  CHECK_FALSE(rep.truncated);
  CHECK(rep.examples.empty());

  // the merge is deterministic in the thread count
  FullBaseReport rep4 = full_base_sweep(mi, b, 0, 4);
  CHECK(rep4.bases == rep.bases);
  CHECK(rep4.starts == rep.starts);
  CHECK(rep4.comps == rep.comps);
  CHECK(rep4.observed_d == rep.observed_d);
  CHECK(rep4.observed_k == rep.observed_k);
}

TEST_CASE("axiom verifier passes the one-letter mover") {
  Machine m = mover(1);
  MoveInterface mi = move1_interface(m);
  MoveVerifyBudget b;
  b.max_input = 2;
  b.max_target = 2;
  b.search.max_length = 12;
  b.search.max_a = 7;
  b.search.start_a_max = 2;
  MoveAxiomReport rep = verify_axioms(mi, b);
  for (std::size_t i = 0; i < 8; ++i) {
    INFO("axiom " << i + 1 << ": " << rep.mv[i].detail);
    CHECK(rep.mv[i].verdict == Verdict::Pass);
  }
  CHECK(rep.observed_d <= mi.d);
  CHECK(rep.observed_k <= mi.k);
  CHECK_FALSE(rep.truncated);
}

TEST_CASE("axiom verifier flags a broken mover") {
  // sabotage: make the transition rule write into the input sector from the
  // left, which no mover may do
  Machine bad = mover(1);
  bad.name = "Move1-broken";  // keep the verifier off the construction shortcut
  bool patched = false;
  for (Rule& r : bad.rules) {
    if (r.name != "theta_sf") continue;
    r.parts[0].right = Word{bad.tapes[1].at(0)};
    patched = true;
  }
  REQUIRE(patched);
  MoveInterface mi = move1_interface(bad);
  MoveVerifyBudget b;
  b.max_input = 1;
  b.max_target = 1;
  b.search.max_length = 6;
  b.search.max_a = 5;
  b.search.start_a_max = 1;
  MoveAxiomReport rep = verify_axioms(mi, b);
  CHECK(rep.mv[0].verdict == Verdict::Fail);
}
