// Composition ladder: the generic staged glue, the history-recording stages,
// the cyclic closure and parallel copies, the two-branch main machine, the
// parameter chain, and the letter blow-up.  The toy recognizer throughout is
// the two-word language {a, aa} over one letter, which keeps every search
// small enough to enumerate exhaustively under tight a-length caps.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "smw/compose.hpp"
#include "smw/engine.hpp"
#include "smw/move.hpp"
#include "smw/zoo.hpp"

using namespace smw;

namespace {

const Pipeline& toy() {
  static const Pipeline P = [] {
    Machine mv = build_move1(Alphabet("X", {"a"}));
    Alphabet Xw("Xw", {"a"});
    Machine rec = build_finite_recognizer("S", Xw, {word_in(Xw, "a"), word_in(Xw, "a a")});
    return build_pipeline(move1_interface(mv), rec, MainConfig{});
  }();
  return P;
}

Word toy_input(std::size_t len) {
  const Alphabet& X = toy().move.m.tapes.at(1);
  Word w;
  for (std::size_t i = 0; i < len; ++i) w.push_back(X.at(0));
  return w;
}

// canonical run first, then searches capped just above its a-length profile
RunResult checked_run(const Machine& m, const AdmissibleWord& w0, const RuleNames& ns) {
  RunResult r = run(m, w0, to_history(m, ns));
  REQUIRE(r.ok);
  return r;
}

SearchBudget around(const Computation& c, std::size_t slack = 2) {
  return SearchBudget{c.length(), c.max_a_length() + slack};
}

}  // namespace

TEST_CASE("staged composition glues a cleaner to a recognizer") {
  Alphabet Y("Y", {"a", "b"});
  Alphabet Z("Z", {"z"});
  Machine clean = build_clean(Y, Z);
  Alphabet X2("X2", {"a", "b"});
  Machine rec = build_finite_recognizer("R", X2, {word_in(X2, "b a"), word_in(X2, "a")});

  // the cleaner's copy lands in sector 2, so the recognizer overlaps it with
  // its input slot on that sector
  ComposeSpec cs;
  cs.name = "Acc";
  cs.parts = 3;
  cs.stages = {{&clean, 0, "1"}, {&rec, 1, "2"}};
  cs.transitions.resize(1);
  cs.transitions[0].name = "sigma";
  cs.transitions[0].step = "12";
  cs.transitions[0].unlocked = {2};
  cs.inputs = {1};
  Machine acc = compose(cs);

  CHECK(acc.num_parts() == 3);
  CHECK(acc.rules.size() == 7);  // 3 cleaning + 1 transition + 3 chain

  // v = b z a cleans to (the copy of) ba, which the recognizer accepts
  const Alphabet& t1 = acc.tapes.at(1);
  Word v = {t1.at(1), t1.at(2), t1.at(0)};
  auto res = search_accept(acc, input_configuration(acc, {{1, v}}), SearchBudget{8, 8});
  REQUIRE(res.comp);
  CHECK(res.comp->length() == 6);  // 3 cleaning steps, sigma, 2 eat steps

  // a b cleans to ab, which is not in the language
  Word bad = {t1.at(0), t1.at(1)};
  auto no = search_accept(acc, input_configuration(acc, {{1, bad}}), SearchBudget{10, 8});
  CHECK_FALSE(no.comp);

  SECTION("composing a single machine is the identity") {
    ComposeSpec one;
    one.name = "ignored";
    one.stages = {{&clean, 0, "1"}};
    Machine same = compose(one);
    CHECK(same.name == clean.name);
    CHECK(same.rules.size() == clean.rules.size());
  }

  SECTION("sector identification requires matching alphabet sizes") {
    Alphabet X1("X1", {"a"});
    Machine small = build_finite_recognizer("R1", X1, {word_in(X1, "a")});
    ComposeSpec bad_cs;
    bad_cs.name = "bad";
    bad_cs.parts = 3;
    bad_cs.stages = {{&clean, 0, "1"}, {&small, 1, "2"}};
    bad_cs.transitions.resize(1);
    bad_cs.inputs = {1};
    CHECK_THROWS_WITH(compose(bad_cs), Catch::Matchers::ContainsSubstring("incompatible"));
  }
}

TEST_CASE("three-stage machine: shape and step alphabet") {
  const Pipeline& P = toy();
  CHECK(P.n == 3);
  CHECK(P.s == 4);
  CHECK(P.m1.num_parts() == 13);
  CHECK(P.m1.rules.size() == 18);  // 12 mover + 1 cleaning + 3 chain + 2 transitions
  CHECK(P.phi.size() == 16);
  CHECK(step_labels(P.m1).size() == 5);
  CHECK(step_history_alphabet(P.m1).size() == 7);

  M1Shape sh = m1_shape(P.m1);
  CHECK(sh.n == 3);
  CHECK(sh.s == 4);
  CHECK(sh.phi.size() == 16);
}

TEST_CASE("three-stage machine accepts through its stages") {
  const Pipeline& P = toy();
  Word w = toy_input(1);
  Word H = accept_phi(P, w);
  CHECK(H.size() == 12);  // 10 mover steps, 1 cleaning, 1 eat

  auto r = checked_run(P.m1, input_configuration(P.m1, {{1, w}}), accept_names_m1(P, H));
  CHECK(r.comp.length() == H.size() + 2);
  CHECK(r.comp.end() == accept_configuration(P.m1));
  CHECK(step_history_string(P.m1, r.comp.history) == "(1)(12)(2)(23)(3)");

  Word H2 = accept_phi(P, toy_input(2));
  CHECK(H2.size() == 27);
  auto r2 = checked_run(P.m1, input_configuration(P.m1, {{1, toy_input(2)}}), accept_names_m1(P, H2));
  CHECK(r2.comp.end() == accept_configuration(P.m1));

  // the inverse letter is moved and cleaned but the chain never eats it
  Word winv = {P.move.m.tapes.at(1).at(0, -1)};
  auto no = search_accept(P.m1, input_configuration(P.m1, {{1, winv}}), SearchBudget{16, 10});
  CHECK_FALSE(no.comp);
}

TEST_CASE("recorded history pins the accepting computation") {
  const Pipeline& P = toy();
  CHECK(P.m2.num_parts() == 23);
  Word w = toy_input(1);
  Word H = accept_phi(P, w);

  auto r = checked_run(P.m2, config_I2(P, w, H), accept_names_m1(P, H));
  CHECK(r.comp.length() == H.size() + 2);
  CHECK(r.comp.end() == config_A2(P, H));

  // under the cap there is exactly one reduced computation between the pair
  auto c = count_reduced_between(P.m2, config_I2(P, w, H), config_A2(P, H), around(r.comp));
  CHECK_FALSE(c.truncated);
  CHECK(c.count == 1);

  // mismatched input and history reach nothing
  auto c2 = count_reduced_between(P.m2, config_I2(P, toy_input(2), H), config_A2(P, H),
                                  SearchBudget{H.size() + 2, r.comp.max_a_length() + 6});
  CHECK(c2.count == 0);
}

TEST_CASE("split history sectors carry the same computations") {
  const Pipeline& P = toy();
  CHECK(P.m2s.num_parts() == 43);
  Word w = toy_input(1);
  Word H = accept_phi(P, w);

  auto r = checked_run(P.m2s, config_input(P, P.m2s, w, H), accept_names_m1(P, H));
  CHECK(r.comp.length() == H.size() + 2);
  CHECK(r.comp.end() == config_accept_hist(P, P.m2s, H));

  auto c = count_reduced_between(P.m2s, config_input(P, P.m2s, w, H),
                                 config_accept_hist(P, P.m2s, H), around(r.comp));
  CHECK(c.count == 1);
}

TEST_CASE("shuttle pass reads the recorded history to and fro") {
  const Pipeline& P = toy();
  Word w = toy_input(1);
  Word H = accept_phi(P, w);

  auto r = checked_run(P.m3, config_input(P, P.m3, w, H), accept_names_m3(P, H));
  CHECK(r.comp.length() == (2 * P.k + 1) * H.size() + 2 * P.k + 2);
  CHECK(r.comp.end() == config_accept_hist(P, P.m3, H));
  CHECK(step_history_string(P.m3, r.comp.history) == "(1)(12)(2)(23)(3)(34)(4)");

  // the shuttle never changes the total a-length, so the cap keeps the
  // reduced-computation tree narrow and the pass is provably the only one
  auto c = count_reduced_between(P.m3, config_input(P, P.m3, w, H), config_accept_hist(P, P.m3, H),
                                 around(r.comp));
  CHECK_FALSE(c.truncated);
  CHECK(c.count == 1);
}

TEST_CASE("eraser clears the records") {
  const Pipeline& P = toy();
  Word w = toy_input(1);
  Word H = accept_phi(P, w);

  auto r = checked_run(P.m4, config_input(P, P.m4, w, H), accept_names_m4(P, H));
  CHECK(r.comp.length() == (2 * P.k + 2) * H.size() + 2 * P.k + 3);
  CHECK(r.comp.end() == accept_configuration(P.m4));

  // exhaustive uniqueness is only checked through the shuttle stage: once the
  // eraser starts freeing a-length, the cap no longer prunes junk excursions
  // and the reduced-computation tree is astronomically wide.  A wrong input
  // still fails the canonical replay deterministically.
  RunResult bad =
      run(P.m4, config_input(P, P.m4, toy_input(2), H), to_history(P.m4, accept_names_m4(P, H)));
  CHECK_FALSE(bad.ok);
}

TEST_CASE("cyclic closure keeps the computations and revolves the base") {
  const Pipeline& P = toy();
  CHECK(P.m4c.cyclic);
  CHECK(P.m4c.num_parts() == 44);
  CHECK(classify_base(P.m4c, standard_base(P.m4c)) == BaseClass::Standard);

  // revolving bases start and end on the same letter: rotate, then close
  Base rot = standard_base(P.m4c);
  std::rotate(rot.begin(), rot.begin() + 2, rot.end());
  rot.push_back(rot.front());
  CHECK(classify_base(P.m4c, rot) == BaseClass::Revolving);

  Word w = toy_input(1);
  Word H = accept_phi(P, w);
  auto r = checked_run(P.m4c, config_input(P, P.m4c, w, H), accept_names_m4(P, H));
  CHECK(r.comp.length() == (2 * P.k + 2) * H.size() + 2 * P.k + 3);
  CHECK(r.comp.end() == accept_configuration(P.m4c));
}

TEST_CASE("leading pass returns the history and leaves the input open") {
  const Pipeline& P = toy();
  Word w = toy_input(1);
  Word H = accept_phi(P, w);

  auto r = checked_run(P.m5, config_I5(P, w, H), accept_names_m5(P, H));
  CHECK(r.comp.length() == (2 * P.k + 4) * H.size() + 2 * P.k + 5);
  CHECK(r.comp.end() == accept_configuration(P.m5));
  CHECK(step_history_string(P.m5, r.comp.history) == "(0)(01)(1)(12)(2)(23)(3)(34)(4)(45)(5)");

  // the leading pass builds the records from nothing, so as with the eraser
  // a skewed history only shows up against the canonical replay
  RunResult bad = run(P.m5, config_I5(P, toy_input(2), H), to_history(P.m5, accept_names_m5(P, H)));
  CHECK_FALSE(bad.ok);
}

TEST_CASE("parallel copies run in lockstep") {
  const Pipeline& P = toy();
  CHECK(P.m61.num_parts() == 44 * 8);
  CHECK(P.m61.rules.size() == P.m5.rules.size());
  CHECK(P.m62.rules.size() == P.m5.rules.size());

  Word w = toy_input(1);
  Word H = accept_phi(P, w);
  auto r = checked_run(P.m61, config_I6(P, w, H), accept_names_m5(P, H));
  CHECK(r.comp.length() == (2 * P.k + 4) * H.size() + 2 * P.k + 5);
  CHECK(r.comp.end() == accept_configuration(P.m61));

  // the second parallel machine accepts with the special input erased
  auto rj = checked_run(P.m62, config_J6(P, w, H), accept_names_m5(P, H));
  CHECK(rj.comp.end() == accept_configuration(P.m62));

  // but rejects the full input configuration at the very first rule, whose
  // locked special sector is nonempty
  RunResult bad = run(P.m62, config_input(P, P.m62, w, H), to_history(P.m62, accept_names_m5(P, H)));
  CHECK_FALSE(bad.ok);
  CHECK(bad.failed_at == 0);
}

TEST_CASE("main machine runs one branch per accepting computation") {
  const Pipeline& P = toy();
  const Machine& M = P.mm;
  CHECK(M.rules.size() == 2 * (P.m5.rules.size() + 2));
  CHECK(step_labels(M).size() == 26);

  Word w = toy_input(1);
  Word H = accept_phi(P, w);
  AdmissibleWord I = config_I(P, w, H);
  AdmissibleWord J = config_J(P, w, H);

  auto r1 = run(M, I, accept_history_main(P, H, 1));
  REQUIRE(r1.ok);
  CHECK(r1.comp.length() == (2 * P.k + 4) * H.size() + 2 * P.k + 7);
  CHECK(r1.comp.end() == accept_configuration(M));
  CHECK(ell(M, r1.comp.history) == 1);

  auto r2 = run(M, J, accept_history_main(P, H, 2));
  REQUIRE(r2.ok);
  CHECK(r2.comp.end() == accept_configuration(M));
  CHECK(ell(M, r2.comp.history) == 1);

  // the full input configuration cannot start the second branch
  CHECK_FALSE(applicable(M, named_rule(M, "sigma(s)2"), I));

  // W = J * sigma(s)1 is accepted, but the computation has to change branch:
  // back out of the first branch, then accept through the second
  AdmissibleWord W = apply(M, named_rule(M, "sigma(s)1"), J).result;
  History wh;
  wh.push_back(named_rule(M, "sigma(s)1", -1));
  for (const SignedRule& sr : accept_history_main(P, H, 2)) wh.push_back(sr);
  auto rw = run(M, W, wh);
  REQUIRE(rw.ok);
  CHECK(rw.comp.length() == r2.comp.length() + 1);
  CHECK(rw.comp.end() == accept_configuration(M));
  CHECK(ell(M, rw.comp.history) == 2);

  // no rule of the second branch even applies to W, and pressing on inside
  // the first branch piles junk into the special copy and never accepts
  bool second = false;
  for (std::size_t i = 0; i < M.rules.size(); ++i)
    if (M.rules[i].branch == 2)
      second = second || applicable(M, SignedRule{i, 1}, W) || applicable(M, SignedRule{i, -1}, W);
  CHECK_FALSE(second);
  History cont = accept_history_main(P, H, 1);
  cont.erase(cont.begin());
  RunResult press = run(M, W, cont);
  CHECK_FALSE(press.ok);

  // mismatched pair fails the canonical replay
  RunResult bad = run(M, config_I(P, toy_input(2), H), accept_history_main(P, H, 1));
  CHECK_FALSE(bad.ok);
}

TEST_CASE("parameter chain records and checks its lower bounds") {
  const Pipeline& P = toy();
  const ParamChain& c = P.chain;
  CHECK(c.ok());
  CHECK(c.N == 44);
  CHECK(c.K0 == 22 * 8 + 1);
  CHECK(c.c0 == 4096.0 * 44);
  CHECK(c.c1 == 2 * std::pow(c.c0, 4));

  ParamChain badc = c;
  badc.c0 = 8;
  badc = validate_chain(badc);
  CHECK_FALSE(badc.ok());
  bool flagged = false;
  for (const auto& b : badc.audit)
    if (b.name == "c0" && !b.ok) flagged = true;
  CHECK(flagged);
}

TEST_CASE("blow-up multiplies word lengths exactly") {
  Alphabet X("B", {"a", "b"});
  std::mt19937 rng(20240817);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t M = 1 + rng() % 4;
    std::size_t len = 1 + rng() % 12;
    Word w;
    while (w.size() < len) {
      Letter l = X.at(rng() % 2, rng() % 2 ? 1 : -1);
      if (!w.empty() && w.back().cancels(l)) continue;
      w.push_back(l);
    }
    Alphabet Xt = blow_up_alphabet(X, M, "Bt");
    Word wt = blow_up_word(X, Xt, w, M);
    CHECK(wt.size() == M * w.size());
    CHECK(is_reduced(wt));
  }
}

TEST_CASE("blown-up machine brackets the original accept times") {
  Alphabet X("B", {"a", "b"});
  std::vector<Word> words = {word_in(X, "a b"), word_in(X, "b"), word_in(X, "a b^-1 a")};
  Machine S = build_finite_recognizer("S2", X, words);

  // one piece is the identity, names and all
  Machine same = blow_up_machine(S, 1);
  CHECK(same.name == S.name);
  CHECK(same.rules.size() == S.rules.size());

  for (std::size_t M : {2u, 3u, 4u}) {
    Machine St = blow_up_machine(S, M);
    CHECK(St.rules.size() == S.rules.size() * M);
    const Alphabet& Xt = St.tapes.at(1);
    for (const Word& w : words) {
      Word wr = copy_word(X, S.tapes.at(1), w);
      auto t = accept_time(S, input_configuration(S, {{1, wr}}), SearchBudget{8, 8});
      REQUIRE(t);
      CHECK(*t == w.size());
      Word wt = blow_up_word(S.tapes.at(1), Xt, wr, M);
      auto tt = accept_time(St, input_configuration(St, {{1, wt}}), SearchBudget{4 * 8, 4 * 8});
      REQUIRE(tt);
      CHECK(*t <= *tt);
      CHECK(*tt <= M * *t);
    }
    // a word outside the language stays outside
    Word bad = blow_up_word(S.tapes.at(1), Xt, copy_word(X, S.tapes.at(1), word_in(X, "b a")), M);
    CHECK_FALSE(accept_time(St, input_configuration(St, {{1, bad}}), SearchBudget{4 * 8, 4 * 8}));
  }
}

TEST_CASE("accept padding adds a fixed tail to every accepting computation") {
  Alphabet X("B", {"a", "b"});
  Machine S = build_finite_recognizer("S3", X, {word_in(X, "a")});
  CHECK(pad_accept(S, 1).rules.size() == S.rules.size());

  Machine padded = pad_accept(S, 3);
  CHECK(padded.rules.size() == S.rules.size() + 2);
  auto t = accept_time(padded, input_configuration(padded, {{1, word_in(padded.tapes.at(1), "a")}}),
                       SearchBudget{6, 6});
  REQUIRE(t);
  CHECK(*t == 3);  // one eat step plus the two switching steps
}
