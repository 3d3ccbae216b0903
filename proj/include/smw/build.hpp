// Small fluent helpers for assembling machines in code. Rules default every
// singleton part to its only letter; multi-letter parts must be mapped
// explicitly or the builder refuses.
#ifndef SMW_BUILD_HPP
#define SMW_BUILD_HPP

#include "smw/machine.hpp"

namespace smw {

class RuleBuilder {
 public:
  RuleBuilder(Machine& m, std::string name) : m_(m) {
    r_.name = std::move(name);
    r_.parts.resize(m_.num_parts());
    r_.domains.assign(m_.num_slots(), SectorDomain{});
    mapped_.assign(m_.num_parts(), false);
  }

  RuleBuilder& step(std::string s) {
    r_.step = std::move(s);
    return *this;
  }
  RuleBuilder& branch(int b) {
    r_.branch = b;
    return *this;
  }

  RuleBuilder& map(std::size_t part, std::string_view from, std::string_view to) {
    r_.parts.at(part).from = intern(from);
    r_.parts.at(part).to = intern(to);
    mapped_.at(part) = true;
    return *this;
  }
  RuleBuilder& fix(std::size_t part, std::string_view letter) { return map(part, letter, letter); }

  RuleBuilder& left(std::size_t part, const Word& w) {
    r_.parts.at(part).left = w;
    return *this;
  }
  RuleBuilder& left(std::size_t part, const Letter& l) { return left(part, Word{l}); }
  RuleBuilder& right(std::size_t part, const Word& w) {
    r_.parts.at(part).right = w;
    return *this;
  }
  RuleBuilder& right(std::size_t part, const Letter& l) { return right(part, Word{l}); }

  RuleBuilder& lock(std::size_t sector) {
    r_.domains.at(sector) = SectorDomain{SectorDomain::Locked, {}};
    return *this;
  }
  RuleBuilder& lock_all_but(const std::vector<std::size_t>& open) {
    for (std::size_t j = 0; j < m_.num_slots(); ++j) {
      if (!m_.valid_sector(j)) continue;
      if (std::find(open.begin(), open.end(), j) == open.end()) lock(j);
    }
    return *this;
  }
  RuleBuilder& domain(std::size_t sector, const std::vector<std::uint32_t>& letters) {
    r_.domains.at(sector) = SectorDomain{SectorDomain::Subset, letters};
    return *this;
  }

  // push the rule into the machine
  void done() {
    for (std::size_t i = 0; i < m_.num_parts(); ++i) {
      if (mapped_[i]) continue;
      if (m_.parts[i].letters.size() != 1)
        throw std::runtime_error(r_.name + ": part " + name_of(m_.parts[i].letters.name) +
                                 " needs an explicit state map");
      r_.parts[i].from = r_.parts[i].to = m_.parts[i].letters.letters[0];
    }
    m_.rules.push_back(std::move(r_));
  }

 private:
  Machine& m_;
  Rule r_;
  std::vector<bool> mapped_;
};

class MachineBuilder {
 public:
  explicit MachineBuilder(std::string name, bool cyclic = false) {
    m_.name = std::move(name);
    m_.cyclic = cyclic;
  }

  std::size_t part(std::string_view part_name, const std::vector<std::string>& letters,
                   std::string_view start = "", std::string_view end = "") {
    Part p;
    p.letters = Alphabet(part_name, letters);
    if (!start.empty()) p.start = intern(start);
    if (!end.empty()) p.end = intern(end);
    m_.parts.push_back(std::move(p));
    return m_.parts.size() - 1;
  }

  // tapes are set after parts exist; missing slots become empty alphabets
  void tape(std::size_t sector, std::string_view tape_name,
            const std::vector<std::string>& letters) {
    if (m_.tapes.size() < m_.parts.size()) m_.tapes.resize(m_.parts.size());
    m_.tapes.at(sector) = Alphabet(tape_name, letters);
  }
  void tape(std::size_t sector, const Alphabet& a) {
    if (m_.tapes.size() < m_.parts.size()) m_.tapes.resize(m_.parts.size());
    m_.tapes.at(sector) = a;
  }

  void inputs(std::vector<std::size_t> sectors) { m_.input_sectors = std::move(sectors); }

  RuleBuilder rule(std::string name) { return RuleBuilder(m_, std::move(name)); }

  Machine& raw() { return m_; }

  Machine finish() {
    if (m_.tapes.size() < m_.parts.size()) m_.tapes.resize(m_.parts.size());
    // unnamed tape slots get fresh placeholder names so finalize's disjointness
    // checks hold; they carry no letters
    for (std::size_t j = 0; j < m_.tapes.size(); ++j) {
      if (m_.tapes[j].name == intern(""))
        m_.tapes[j] = Alphabet(m_.name + "-empty-tape-" + std::to_string(j), {});
    }
    m_.finalize();
    return m_;
  }

 private:
  Machine m_;
};

}  // namespace smw

#endif
