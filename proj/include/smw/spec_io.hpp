// Machine-spec files: JSON in, canonical JSON out. The printer emits keys in
// a fixed order and omits defaulted fields, so print(parse(print(m))) is
// byte-identical to print(m).
#ifndef SMW_SPEC_IO_HPP
#define SMW_SPEC_IO_HPP

#include <json.hpp>

#include "smw/machine.hpp"

namespace smw {

using Json = nlohmann::ordered_json;

inline Json alphabet_to_json(const Alphabet& a) {
  Json j;
  j["name"] = name_of(a.name);
  Json ls = Json::array();
  for (auto s : a.letters) ls.push_back(name_of(s));
  j["letters"] = std::move(ls);
  return j;
}

inline Alphabet alphabet_from_json(const Json& j) {
  std::vector<std::string> ls;
  for (const auto& l : j.at("letters")) ls.push_back(l.get<std::string>());
  Alphabet a(j.at("name").get<std::string>(), ls);
  check_name(name_of(a.name));
  for (auto s : a.letters) check_name(name_of(s));
  return a;
}

inline Json machine_to_json(const Machine& m) {
  Json j;
  j["name"] = m.name;
  j["cyclic"] = m.cyclic;

  Json parts = Json::array();
  for (const auto& p : m.parts) {
    Json pj = alphabet_to_json(p.letters);
    if (p.start) pj["start"] = name_of(*p.start);
    if (p.end) pj["end"] = name_of(*p.end);
    parts.push_back(std::move(pj));
  }
  j["parts"] = std::move(parts);

  // tape order in the file: sectors 1..N, then the wraparound slot if cyclic
  Json tapes = Json::array();
  for (std::size_t s = 1; s < m.num_slots(); ++s) tapes.push_back(alphabet_to_json(m.tapes[s]));
  if (m.cyclic) tapes.push_back(alphabet_to_json(m.tapes[0]));
  j["tapes"] = std::move(tapes);

  Json inputs = Json::array();
  for (auto s : m.input_sectors) inputs.push_back(s);
  j["input_sectors"] = std::move(inputs);

  Json rules = Json::array();
  for (const auto& r : m.rules) {
    Json rj;
    rj["name"] = r.name;
    if (!r.step.empty()) rj["step"] = r.step;
    if (r.branch != 0) rj["branch"] = r.branch;
    Json rps = Json::array();
    for (const auto& rp : r.parts) {
      Json pj;
      pj["from"] = name_of(rp.from);
      pj["to"] = name_of(rp.to);
      if (!rp.left.empty()) pj["left"] = to_string(rp.left);
      if (!rp.right.empty()) pj["right"] = to_string(rp.right);
      rps.push_back(std::move(pj));
    }
    rj["parts"] = std::move(rps);
    Json doms = Json::array();
    for (std::size_t s = 0; s < r.domains.size(); ++s) {
      if (!m.valid_sector(s)) continue;
      const SectorDomain& d = r.domains[s];
      if (d.kind == SectorDomain::Full) continue;
      Json dj;
      dj["sector"] = s;
      dj["kind"] = d.kind == SectorDomain::Locked ? "locked" : "subset";
      if (d.kind == SectorDomain::Subset) {
        Json ls = Json::array();
        for (auto sym : d.letters) ls.push_back(name_of(sym));
        dj["letters"] = std::move(ls);
      }
      doms.push_back(std::move(dj));
    }
    if (!doms.empty()) rj["domains"] = std::move(doms);
    rules.push_back(std::move(rj));
  }
  j["rules"] = std::move(rules);
  return j;
}

inline Machine machine_from_json(const Json& j) {
  Machine m;
  m.name = j.at("name").get<std::string>();
  m.cyclic = j.value("cyclic", false);

  for (const auto& pj : j.at("parts")) {
    Part p;
    p.letters = alphabet_from_json(pj);
    if (pj.contains("start")) p.start = intern(pj["start"].get<std::string>());
    if (pj.contains("end")) p.end = intern(pj["end"].get<std::string>());
    m.parts.push_back(std::move(p));
  }

  std::vector<Alphabet> file_tapes;
  for (const auto& tj : j.at("tapes")) file_tapes.push_back(alphabet_from_json(tj));
  std::size_t expect = m.cyclic ? m.parts.size() : m.parts.size() - 1;
  if (file_tapes.size() != expect)
    throw std::runtime_error(m.name + ": expected " + std::to_string(expect) + " tapes");
  m.tapes.resize(m.parts.size());
  for (std::size_t s = 1; s < m.parts.size(); ++s) m.tapes[s] = file_tapes[s - 1];
  if (m.cyclic) m.tapes[0] = file_tapes.back();

  for (const auto& sj : j.at("input_sectors")) m.input_sectors.push_back(sj.get<std::size_t>());

  for (const auto& rj : j.at("rules")) {
    Rule r;
    r.name = rj.at("name").get<std::string>();
    r.step = rj.value("step", std::string());
    r.branch = rj.value("branch", 0);
    for (const auto& pj : rj.at("parts")) {
      RulePart rp;
      rp.from = intern(pj.at("from").get<std::string>());
      rp.to = intern(pj.at("to").get<std::string>());
      if (pj.contains("left")) rp.left = parse_word(pj["left"].get<std::string>());
      if (pj.contains("right")) rp.right = parse_word(pj["right"].get<std::string>());
      r.parts.push_back(std::move(rp));
    }
    r.domains.assign(m.parts.size(), SectorDomain{});
    if (rj.contains("domains")) {
      for (const auto& dj : rj["domains"]) {
        std::size_t s = dj.at("sector").get<std::size_t>();
        if (s >= r.domains.size()) throw std::runtime_error(m.name + ": bad domain sector");
        std::string kind = dj.at("kind").get<std::string>();
        if (kind == "locked") {
          r.domains[s].kind = SectorDomain::Locked;
        } else if (kind == "subset") {
          r.domains[s].kind = SectorDomain::Subset;
          for (const auto& l : dj.at("letters")) r.domains[s].letters.push_back(intern(l.get<std::string>()));
        } else if (kind == "full") {
          r.domains[s].kind = SectorDomain::Full;
        } else {
          throw std::runtime_error(m.name + ": bad domain kind " + kind);
        }
      }
    }
    m.rules.push_back(std::move(r));
  }
  m.finalize();
  return m;
}

inline std::string machine_to_text(const Machine& m) {
  return machine_to_json(m).dump(2) + "\n";
}

inline Machine machine_from_text(const std::string& text) {
  return machine_from_json(Json::parse(text));
}

}  // namespace smw

#endif
