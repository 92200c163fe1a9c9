// Copyright (C) 2026 The maskpf Authors
// SPDX-License-Identifier: Apache-2.0

#include "maskpf/manifest.hpp"

#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <json.hpp>

#include "maskpf/error.hpp"

namespace maskpf {

bool is_valid_split(std::string_view split) { return split == "train" || split == "val" || split == "test"; }

Manifest Manifest::parse(const std::string& text, const std::filesystem::path& base_dir) {
  Manifest m;
  m.base_dir = base_dir;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "manifest line " + std::to_string(line_no);
    ManifestRecord r;
    try {
      const auto j = nlohmann::json::parse(line);
      r.clean = j.at("clean").get<std::string>();
      r.coded = j.at("coded").get<std::string>();
      r.split = j.at("split").get<std::string>();
      r.id = j.contains("id") ? j.at("id").get<std::string>() : std::filesystem::path(r.clean).stem().string();
      if (j.contains("preset")) r.preset = parse_preset(j.at("preset").get<std::string>());
      if (r.is_surrogate()) {
        const Preset p = parse_preset(std::string_view(r.coded).substr(kSurrogatePrefix.size()));
        if (r.preset && *r.preset != p) throw Error(ErrorKind::kInvalidInput, "preset disagrees with coded");
        r.preset = p;
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kInvalidInput, where + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::kInvalidInput, where + ": " + e.what());
    }
    if (!is_valid_split(r.split)) throw Error(ErrorKind::kInvalidInput, where + ": unknown split '" + r.split + "'");
    if (!ids.insert(r.id).second) throw Error(ErrorKind::kInvalidInput, where + ": duplicate id '" + r.id + "'");
    m.records.push_back(std::move(r));
  }
  return m;
}

Manifest Manifest::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open manifest " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(text, std::filesystem::absolute(path).parent_path());
}

std::string Manifest::serialize() const {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["clean"] = r.clean;
    j["coded"] = r.coded;
    j["split"] = r.split;
    if (r.preset) j["preset"] = std::string(to_string(*r.preset));
    out += j.dump();
    out += '\n';
  }
  return out;
}

void Manifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write manifest " + path.string());
  out << serialize();
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

std::filesystem::path Manifest::resolve(const std::string& p) const {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

std::vector<ManifestRecord> Manifest::split(std::string_view name) const {
  std::vector<ManifestRecord> out;
  for (const auto& r : records) {
    if (name.empty() || r.split == name) out.push_back(r);
  }
  return out;
}

}  // namespace maskpf
