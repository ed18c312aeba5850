// Copyright 2026 The mia-audit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "miaudit/config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "miaudit/error.h"
#include "miaudit/util.h"

namespace miaudit {

namespace {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& KnownKeys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"dataset", {"name", "corpus"}},
      {"run", {"runs", "output", "parallelism", "seed"}},
      {"sage", {"max_attempts", "tau_sps", "tau_ov"}},
      {"attack",
       {"k_percent", "bow_folds", "zlib_level", "want_moments",
        "member_prefix", "nonmember_prefix"}},
      {"eval", {"fpr_target"}},
      {"audit", {"attack", "tau_mia", "eps_rob", "eps_util"}},
      {"paraphraser",
       {"source", "path", "url", "api_key_env", "model", "models",
        "timeout_ms"}},
      {"tagger", {"source", "path", "url", "api_key_env", "model", "timeout_ms"}},
      {"features",
       {"source", "path", "url", "api_key_env", "model", "timeout_ms"}},
      {"scorer",
       {"source", "path", "url", "api_key_env", "model", "timeout_ms",
        "reference_url", "reference_model"}},
  };
  return keys;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::string base_dir)
      : tree_(tree), base_dir_(std::move(base_dir)) {}

  std::optional<std::string> Str(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) return std::nullopt;
    return Trim(*v);
  }

  std::optional<double> Num(const std::string& key) const {
    auto s = Str(key);
    if (!s) return std::nullopt;
    try {
      std::size_t used = 0;
      const double v = std::stod(*s, &used);
      if (used != s->size() || !std::isfinite(v)) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::kConfig, key + ": expected a number, got '" + *s + "'");
    }
  }

  std::optional<long long> Int(const std::string& key) const {
    auto s = Str(key);
    if (!s) return std::nullopt;
    try {
      std::size_t used = 0;
      const long long v = std::stoll(*s, &used);
      if (used != s->size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::kConfig,
                  key + ": expected an integer, got '" + *s + "'");
    }
  }

  std::optional<bool> Bool(const std::string& key) const {
    auto s = Str(key);
    if (!s) return std::nullopt;
    const std::string v = AsciiLower(*s);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw Error(ErrorCode::kConfig, key + ": expected a boolean, got '" + *s + "'");
  }

  std::string Path(const std::string& p) const {
    if (p.empty() || fs::path(p).is_absolute()) return p;
    return (fs::path(base_dir_) / p).lexically_normal().string();
  }

 private:
  const pt::ptree& tree_;
  std::string base_dir_;
};

ProviderConfig ReadProvider(const Reader& r, const std::string& section) {
  ProviderConfig p;
  const std::string source = r.Str(section + ".source").value_or("file");
  if (source == "file") {
    p.source = ProviderSource::kFile;
  } else if (source == "service") {
    p.source = ProviderSource::kService;
  } else {
    throw Error(ErrorCode::kConfig,
                section + ".source must be 'file' or 'service'");
  }
  if (auto v = r.Str(section + ".path")) p.path = r.Path(*v);
  p.endpoint.url = r.Str(section + ".url").value_or("");
  p.endpoint.api_key_env = r.Str(section + ".api_key_env").value_or("");
  p.endpoint.model = r.Str(section + ".model").value_or("");
  if (auto ms = r.Int(section + ".timeout_ms")) {
    if (*ms <= 0) throw Error(ErrorCode::kConfig, section + ".timeout_ms must be > 0");
    p.endpoint.timeout = std::chrono::milliseconds(*ms);
  }
  if (auto v = r.Str(section + ".models")) p.models = SplitList(*v);
  p.reference = p.endpoint;
  p.reference.url = r.Str(section + ".reference_url").value_or("");
  p.reference.model = r.Str(section + ".reference_model").value_or("");
  return p;
}

nlohmann::json EndpointJson(const ServiceEndpoint& e) {
  return {{"url", e.url},
          {"api_key_env", e.api_key_env},
          {"model", e.model},
          {"timeout_ms", e.timeout.count()}};
}

nlohmann::json ProviderJson(const ProviderConfig& p) {
  nlohmann::json j = {{"source", p.source == ProviderSource::kFile ? "file" : "service"}};
  if (p.source == ProviderSource::kFile) {
    j["path"] = p.path;
  } else {
    j["endpoint"] = EndpointJson(p.endpoint);
    j["models"] = p.models;
    if (p.reference.configured()) j["reference"] = EndpointJson(p.reference);
  }
  return j;
}

void Replace(std::string& s, std::string_view from, const std::string& to) {
  for (auto pos = s.find(from); pos != std::string::npos;
       pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

}  // namespace

std::string ProviderConfig::PathFor(const std::string& run,
                                    const std::string& regime) const {
  std::string out = path;
  Replace(out, "{run}", run);
  Replace(out, "{regime}", regime);
  return out;
}

void PipelineConfig::Validate() const {
  if (corpus.empty()) throw Error(ErrorCode::kConfig, "dataset.corpus is required");
  if (!fs::exists(corpus)) {
    throw Error(ErrorCode::kConfig, "corpus file not found: " + corpus);
  }
  if (dataset.empty()) throw Error(ErrorCode::kConfig, "dataset.name is empty");
  if (runs.empty()) throw Error(ErrorCode::kConfig, "run.runs is empty");
  std::set<std::string> unique(runs.begin(), runs.end());
  if (unique.size() != runs.size() || unique.contains("shared")) {
    throw Error(ErrorCode::kConfig,
                "run ids must be unique and may not be 'shared'");
  }
  if (parallelism < 1) throw Error(ErrorCode::kConfig, "run.parallelism must be >= 1");
  sage.Validate();
  if (!(attack.k_percent > 0.0 && attack.k_percent <= 100.0)) {
    throw Error(ErrorCode::kConfig, "attack.k_percent must lie in (0, 100]");
  }
  if (attack.bow_folds < 2) throw Error(ErrorCode::kConfig, "attack.bow_folds must be >= 2");
  if (attack.zlib_level < 0 || attack.zlib_level > 9) {
    throw Error(ErrorCode::kConfig, "attack.zlib_level must lie in [0, 9]");
  }
  if (!(fpr_target >= 0.0 && fpr_target <= 1.0)) {
    throw Error(ErrorCode::kConfig, "eval.fpr_target must lie in [0, 1]");
  }
  if (!(eps_rob > 0.0)) throw Error(ErrorCode::kConfig, "audit.eps_rob must be > 0");
  if (!paraphraser.models.empty() && paraphraser.models.size() != runs.size()) {
    throw Error(ErrorCode::kConfig, "paraphraser.models needs one model per run");
  }
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec) {
    throw Error(ErrorCode::kConfig,
                "cannot create output directory " + output_dir + ": " + ec.message());
  }
}

AuditConfig PipelineConfig::Audit() const {
  if (!tau_mia) {
    throw Error(ErrorCode::kConfig,
                "audit.tau_mia must be set explicitly; it is never inferred");
  }
  AuditConfig cfg;
  cfg.tau_mia = *tau_mia;
  cfg.eps_rob = eps_rob;
  cfg.tau_sps = sage.tau_sps;
  cfg.eps_util = eps_util;
  cfg.Validate();
  return cfg;
}

nlohmann::json PipelineConfig::ToJson() const {
  nlohmann::json signs = nlohmann::json::object();
  for (const auto& [a, s] : attack.sign) signs[std::string(AttackName(a))] = s;
  return {
      {"dataset", {{"name", dataset}, {"corpus", corpus}}},
      {"run", {{"runs", runs}, {"output", output_dir}, {"seed", seed}}},
      {"sage",
       {{"max_attempts", sage.max_attempts},
        {"tau_sps", sage.tau_sps},
        {"tau_ov", sage.tau_ov},
        {"prompt", sage.base_prompt}}},
      {"attack",
       {{"k_percent", attack.k_percent},
        {"bow_folds", attack.bow_folds},
        {"zlib_level", attack.zlib_level},
        {"want_moments", want_moments},
        {"member_prefix", member_prefix},
        {"nonmember_prefix", nonmember_prefix},
        {"sign", signs}}},
      {"eval", {{"fpr_target", fpr_target}}},
      {"audit",
       {{"attack", std::string(AttackName(audit_attack))},
        {"tau_mia", tau_mia ? nlohmann::json(*tau_mia) : nlohmann::json()},
        {"eps_rob", eps_rob},
        {"eps_util", eps_util ? nlohmann::json(*eps_util) : nlohmann::json()}}},
      {"paraphraser", ProviderJson(paraphraser)},
      {"tagger", ProviderJson(tagger)},
      {"features", ProviderJson(features)},
      {"scorer", ProviderJson(scorer)},
  };
}

PipelineConfig ParsePipelineConfig(const std::string& text,
                                   const std::string& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::kConfig, std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    auto known = KnownKeys().find(section);
    if (known == KnownKeys().end() || body.data().size() > 0) {
      throw Error(ErrorCode::kConfig, "config: unknown section [" + section + "]");
    }
    for (const auto& [key, _] : body) {
      if (!known->second.contains(key)) {
        throw Error(ErrorCode::kConfig,
                    "config: unknown key " + section + "." + key);
      }
    }
  }

  const Reader r(tree, base_dir);
  PipelineConfig cfg;
  cfg.dataset = r.Str("dataset.name").value_or(cfg.dataset);
  if (auto v = r.Str("dataset.corpus")) cfg.corpus = r.Path(*v);
  if (auto v = r.Str("run.runs")) cfg.runs = SplitList(*v);
  cfg.output_dir = r.Path(r.Str("run.output").value_or(cfg.output_dir));
  if (auto v = r.Int("run.parallelism")) cfg.parallelism = static_cast<int>(*v);
  if (auto v = r.Int("run.seed")) {
    if (*v < 0) throw Error(ErrorCode::kConfig, "run.seed must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(*v);
  }
  cfg.attack.seed = cfg.seed;

  if (auto v = r.Int("sage.max_attempts")) cfg.sage.max_attempts = static_cast<int>(*v);
  if (auto v = r.Num("sage.tau_sps")) cfg.sage.tau_sps = *v;
  if (auto v = r.Num("sage.tau_ov")) cfg.sage.tau_ov = *v;

  if (auto v = r.Num("attack.k_percent")) cfg.attack.k_percent = *v;
  if (auto v = r.Int("attack.bow_folds")) cfg.attack.bow_folds = static_cast<int>(*v);
  if (auto v = r.Int("attack.zlib_level")) cfg.attack.zlib_level = static_cast<int>(*v);
  if (auto v = r.Bool("attack.want_moments")) cfg.want_moments = *v;
  if (auto v = r.Str("attack.member_prefix")) cfg.member_prefix = r.Path(*v);
  if (auto v = r.Str("attack.nonmember_prefix")) cfg.nonmember_prefix = r.Path(*v);

  if (auto v = r.Num("eval.fpr_target")) cfg.fpr_target = *v;

  if (auto v = r.Str("audit.attack")) {
    auto a = ParseAttack(*v);
    if (!a) throw Error(ErrorCode::kConfig, "audit.attack: unknown attack " + *v);
    cfg.audit_attack = *a;
  }
  cfg.tau_mia = r.Num("audit.tau_mia");
  if (auto v = r.Num("audit.eps_rob")) cfg.eps_rob = *v;
  cfg.eps_util = r.Num("audit.eps_util");

  cfg.paraphraser = ReadProvider(r, "paraphraser");
  cfg.tagger = ReadProvider(r, "tagger");
  cfg.features = ReadProvider(r, "features");
  cfg.scorer = ReadProvider(r, "scorer");
  return cfg;
}

PipelineConfig LoadPipelineConfig(const std::string& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::kConfig, "config not found: " + path);
  const std::string base = fs::absolute(path).parent_path().string();
  return ParsePipelineConfig(ReadFile(path), base);
}

}  // namespace miaudit
