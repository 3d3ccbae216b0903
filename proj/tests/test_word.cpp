#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "smw/word.hpp"

using namespace smw;

namespace {

// Enumerate every word of length <= max_len over the signed letters of a.
template <typename F>
void for_all_words(const Alphabet& a, std::size_t max_len, F&& f) {
  std::vector<Letter> signed_letters;
  for (std::size_t i = 0; i < a.size(); ++i) {
    signed_letters.push_back(a.at(i, 1));
    signed_letters.push_back(a.at(i, -1));
  }
  const std::size_t k = signed_letters.size();
  for (std::size_t len = 0; len <= max_len; ++len) {
    std::vector<std::size_t> idx(len, 0);
    while (true) {
      Word w;
      w.reserve(len);
      for (std::size_t i = 0; i < len; ++i) w.push_back(signed_letters[idx[i]]);
      f(w);
      std::size_t p = 0;
      while (p < len && ++idx[p] == k) {
        idx[p] = 0;
        ++p;
      }
      if (p == len) break;
    }
  }
}

Word random_word(const Alphabet& a, std::size_t len, std::mt19937& rng) {
  Word w;
  std::uniform_int_distribution<std::size_t> pick(0, a.size() - 1);
  std::uniform_int_distribution<int> sign(0, 1);
  for (std::size_t i = 0; i < len; ++i) w.push_back(a.at(pick(rng), sign(rng) ? 1 : -1));
  return w;
}

}  // namespace

TEST_CASE("free reduction basics", "[word]") {
  Alphabet y("Y", {"a", "b"});
  Word w = word_in(y, "a b b^-1 a a^-1 b");
  Word r = reduce(w);
  REQUIRE(to_string(r) == "Y:a Y:b");
  REQUIRE(is_reduced(r));
  REQUIRE(reduce(r) == r);

  REQUIRE(reduce(concat(w, inverse(w))).empty());
  REQUIRE(to_string(Word{}) == "1");
  REQUIRE(parse_word("1").empty());
  REQUIRE(parse_word("").empty());
}

TEST_CASE("reduction properties, exhaustive to length 5", "[word]") {
  Alphabet y("Y", {"a", "b"});
  for_all_words(y, 5, [](const Word& w) {
    Word r = reduce(w);
    REQUIRE(is_reduced(r));
    REQUIRE(reduce(r) == r);
    // reduction of the inverse is the inverse of the reduction
    REQUIRE(reduce(inverse(w)) == inverse(r));
    // w w^-1 is trivial
    REQUIRE(reduce(concat(w, inverse(w))).empty());
  });
}

TEST_CASE("cyclic reduction matches rotation oracle, exhaustive to length 8", "[word][oracle]") {
  Alphabet y("Y", {"a", "b"});
  for_all_words(y, 8, [](const Word& w) {
    Word c = cyclic_reduce(w);
    REQUIRE(is_cyclically_reduced(c));
    // oracle: the cyclically reduced length is the minimum reduced length
    // over all rotations of the reduced word
    Word r = reduce(w);
    std::size_t best = r.size();
    for (std::size_t k = 0; k < std::max<std::size_t>(r.size(), 1); ++k)
      best = std::min(best, reduce(rotate(r, k)).size());
    REQUIRE(c.size() == best);
  });
}

TEST_CASE("serialization round trip", "[word]") {
  Alphabet y("Yp", {"y_1", "y'2"});
  std::mt19937 rng(7);
  for (int t = 0; t < 200; ++t) {
    Word w = random_word(y, t % 12, rng);
    REQUIRE(parse_word(to_string(w)) == w);
  }
  Letter l = parse_token("Yp:y'2^-1");
  REQUIRE(l.exp == -1);
  REQUIRE(name_of(l.sym) == "y'2");
  REQUIRE_THROWS(parse_token("noalphabet"));
  REQUIRE_THROWS(parse_token(":x"));
  REQUIRE_THROWS(parse_token("a:"));
}

TEST_CASE("copies commute with reduction", "[word]") {
  Alphabet y("Y", {"a", "b"});
  Alphabet y1("Y1", {"a_1", "b_1"});
  LetterMap m;
  m.add(y, y1);
  std::mt19937 rng(11);
  for (int t = 0; t < 200; ++t) {
    Word w = random_word(y, t % 10, rng);
    REQUIRE(copy_word(reduce(w), m) == reduce(copy_word(w, m)));
    REQUIRE(copy_word(inverse(w), m) == inverse(copy_word(w, m)));
    REQUIRE(norm(copy_word(w, m)) == norm(w));
  }
}

TEST_CASE("bar projection counts deletions and preserves unreducedness", "[word]") {
  Alphabet x("X", {"x1", "x2"});
  Alphabet y("Y", {"y1", "y2"});
  Alphabet z("Z", {"z1"});
  LetterMap ytox;
  ytox.add(y, x);

  // interleave y- and z-letters; the bar image may be unreduced
  Word v = {y.at(0, 1), z.at(0, 1), y.at(0, -1), z.at(0, -1), y.at(1, 1)};
  BarImage b = project_bar(v, ytox, z.name);
  REQUIRE(b.dropped == 2);
  REQUIRE(norm(b.word) == norm(v) - b.dropped);
  REQUIRE(to_string(b.word) == "X:x1 X:x1^-1 X:x2");
  REQUIRE(!is_reduced(b.word));

  std::mt19937 rng(3);
  for (int t = 0; t < 300; ++t) {
    Word w;
    std::uniform_int_distribution<int> which(0, 2);
    for (int i = 0; i < t % 14; ++i) {
      int c = which(rng);
      if (c == 2)
        w.push_back(z.at(0, which(rng) ? 1 : -1));
      else
        w.push_back(y.at(c, which(rng) ? 1 : -1));
    }
    BarImage img = project_bar(w, ytox, z.name);
    REQUIRE(norm(img.word) + img.dropped == norm(w));
    REQUIRE(img.dropped == count_alph(w, z.name));
  }
}

TEST_CASE("canonical letter order is by name", "[word]") {
  Alphabet b("B", {"t"});
  Alphabet a("A", {"s"});
  REQUIRE(letter_less(a.at(0), b.at(0)));
  REQUIRE(letter_less(a.at(0, -1), a.at(0, 1)));
}
