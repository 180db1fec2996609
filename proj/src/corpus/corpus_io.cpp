//
// Project LipidLM - Copyright 2026 The LipidLM Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "lipidlm/corpus/corpus_io.hpp"

#include <fstream>
#include <unordered_map>

#include "lipidlm/error.hpp"

namespace lipidlm::corpus {
namespace {

std::string_view ester_name(EsterKind e) {
  switch (e) {
  case EsterKind::None: return "none";
  case EsterKind::CarbonylFirst: return "carbonyl_first";
  case EsterKind::OxygenFirst: return "oxygen_first";
  }
  return "none";
}

EsterKind ester_from_name(const std::string &s) {
  if (s == "none")
    return EsterKind::None;
  if (s == "carbonyl_first")
    return EsterKind::CarbonylFirst;
  if (s == "oxygen_first")
    return EsterKind::OxygenFirst;
  throw Error(Errc::IoFailure, "unknown ester kind '" + s + "'");
}

std::ofstream open_out(const std::filesystem::path &path) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(Errc::IoFailure, "cannot open " + path.string());
  return in;
}

}  // namespace

nlohmann::ordered_json to_json(const LipidRecord &r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["canonical_smiles"] = r.canonical_smiles;
  j["n_tails"] = r.n_tails;
  j["connecting_atom"] = r.connecting_atom;
  auto regions = nlohmann::ordered_json::array();
  for (Region x: r.atom_regions)
    regions.push_back(x == Region::Head ? "H" : "T");
  j["atom_regions"] = std::move(regions);

  nlohmann::ordered_json prov;
  prov["seed"] = r.provenance.seed;
  prov["head_template"] = r.provenance.head_template;
  auto arms = nlohmann::ordered_json::array();
  for (const ArmSpec &a: r.provenance.arms) {
    nlohmann::ordered_json arm;
    arm["linker"] = a.linker;
    arm["ester"] = ester_name(a.ester);
    auto tails = nlohmann::ordered_json::array();
    for (const TailSpec &t: a.tails)
      tails.push_back({ { "length", t.length },
                        { "branch_at", t.branch_at },
                        { "ring_at", t.ring_at } });
    arm["tails"] = std::move(tails);
    arms.push_back(std::move(arm));
  }
  prov["arms"] = std::move(arms);
  prov["atom_fragment"] = r.provenance.atom_fragment;
  j["provenance"] = std::move(prov);
  j["synth_property"] = r.synth_property;
  return j;
}

LipidRecord record_from_json(const nlohmann::json &j) {
  try {
    LipidRecord r;
    r.id = j.at("id").get<std::string>();
    r.canonical_smiles = j.at("canonical_smiles").get<std::string>();
    r.n_tails = j.at("n_tails").get<int>();
    r.connecting_atom = j.at("connecting_atom").get<int>();
    for (const auto &x: j.at("atom_regions")) {
      const auto s = x.get<std::string>();
      if (s != "H" && s != "T")
        throw Error(Errc::IoFailure, "atom_regions entries must be H or T");
      r.atom_regions.push_back(s == "H" ? Region::Head : Region::Tail);
    }
    if (j.contains("provenance") && !j.at("provenance").is_null()) {
      const auto &p = j.at("provenance");
      r.provenance.seed = p.value("seed", std::uint64_t { 0 });
      r.provenance.head_template = p.value("head_template", -1);
      for (const auto &a: p.value("arms", nlohmann::json::array())) {
        ArmSpec arm;
        arm.linker = a.at("linker").get<int>();
        arm.ester = ester_from_name(a.at("ester").get<std::string>());
        for (const auto &t: a.at("tails"))
          arm.tails.push_back({ t.at("length").get<int>(),
                                t.at("branch_at").get<int>(),
                                t.at("ring_at").get<int>() });
        r.provenance.arms.push_back(std::move(arm));
      }
      r.provenance.atom_fragment =
          p.value("atom_fragment", std::vector<int> {});
    }
    r.synth_property = j.at("synth_property").get<double>();
    return r;
  } catch (const nlohmann::json::exception &e) {
    throw Error(Errc::IoFailure, std::string("malformed corpus record: ") + e.what());
  }
}

nlohmann::ordered_json to_json(const SplitManifest &m) {
  nlohmann::ordered_json j;
  j["seed"] = m.seed;
  j["train"] = m.train;
  j["validation"] = m.validation;
  j["test"] = m.test;
  return j;
}

SplitManifest manifest_from_json(const nlohmann::json &j) {
  try {
    SplitManifest m;
    m.seed = j.value("seed", std::uint64_t { 0 });
    m.train = j.at("train").get<std::vector<std::string>>();
    m.validation = j.at("validation").get<std::vector<std::string>>();
    m.test = j.at("test").get<std::vector<std::string>>();
    return m;
  } catch (const nlohmann::json::exception &e) {
    throw Error(Errc::IoFailure, std::string("malformed split manifest: ") + e.what());
  }
}

void write_corpus_jsonl(const std::filesystem::path &path,
                        const std::vector<LipidRecord> &records) {
  auto out = open_out(path);
  for (const auto &r: records)
    out << to_json(r).dump() << '\n';
  if (!out)
    throw Error(Errc::IoFailure, "write failed for " + path.string());
}

std::vector<LipidRecord> read_corpus_jsonl(const std::filesystem::path &path) {
  auto in = open_in(path);
  std::vector<LipidRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &e) {
      throw Error(Errc::IoFailure, path.string() + ":" + std::to_string(lineno)
                                       + ": " + e.what());
    }
    out.push_back(record_from_json(j));
  }
  return out;
}

void write_split_manifest(const std::filesystem::path &path,
                          const SplitManifest &manifest) {
  auto out = open_out(path);
  out << to_json(manifest).dump(2) << '\n';
  if (!out)
    throw Error(Errc::IoFailure, "write failed for " + path.string());
}

SplitManifest read_split_manifest(const std::filesystem::path &path) {
  auto in = open_in(path);
  try {
    return manifest_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception &e) {
    throw Error(Errc::IoFailure, path.string() + ": " + e.what());
  }
}

std::vector<LipidRecord> select_records(const std::vector<LipidRecord> &records,
                                        const std::vector<std::string> &ids) {
  std::unordered_map<std::string, const LipidRecord *> by_id;
  for (const auto &r: records)
    by_id.emplace(r.id, &r);
  std::vector<LipidRecord> out;
  out.reserve(ids.size());
  for (const auto &id: ids) {
    auto it = by_id.find(id);
    if (it == by_id.end())
      throw Error(Errc::IoFailure, "split references unknown id " + id);
    out.push_back(*it->second);
  }
  return out;
}

}  // namespace lipidlm::corpus
