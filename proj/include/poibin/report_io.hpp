// Machine-readable emission: shortest round-trip decimals, CSV tables,
// JSON-lines certificate records, instance (de)serialisation.
#pragma once

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "poibin/certificates.hpp"
#include "poibin/divergence.hpp"
#include "poibin/harness.hpp"

namespace poibin {

/// Shortest decimal that round-trips to the same double (bit-stable output).
inline std::string format_shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_cell(const cell& c) {
  if (std::holds_alternative<double>(c)) return format_shortest(std::get<double>(c));
  if (std::holds_alternative<std::int64_t>(c)) return std::to_string(std::get<std::int64_t>(c));
  if (std::holds_alternative<bool>(c)) return std::get<bool>(c) ? "true" : "false";
  return std::get<std::string>(c);
}

inline void emit_csv(const SweepTable& t, std::ostream& os) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) os << ',';
    std::string name = t.columns[i];
    for (char& ch : name) {
      if (ch == ',') ch = ';';
    }
    os << '"' << name << '"';
  }
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << format_cell(row[i]);
    }
    os << '\n';
  }
  if (!os) throw std::runtime_error("emit_csv: write failed");
}

inline nlohmann::ordered_json cell_to_json(const cell& c) {
  if (std::holds_alternative<double>(c)) {
    const double v = std::get<double>(c);
    if (std::isnan(v)) return nullptr;
    return v;
  }
  if (std::holds_alternative<std::int64_t>(c)) return std::get<std::int64_t>(c);
  if (std::holds_alternative<bool>(c)) return std::get<bool>(c);
  return std::get<std::string>(c);
}

inline nlohmann::ordered_json to_json(const SweepTable& t) {
  nlohmann::ordered_json out;
  out["name"] = t.name;
  out["assertions_ok"] = t.assertions_ok;
  out["notes"] = t.notes;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj;
    for (std::size_t i = 0; i < row.size(); ++i) {
      // strip the definition suffix for the key, keep it in "columns"
      std::string key = t.columns[i].substr(0, t.columns[i].find(' '));
      obj[key] = cell_to_json(row[i]);
    }
    rows.push_back(std::move(obj));
  }
  out["columns"] = t.columns;
  out["rows"] = std::move(rows);
  return out;
}

/// One certificate per line: {id, k, kappa, applicable, bound, actual, margin, flags}.
inline nlohmann::ordered_json to_json(const BoundCertificate& c) {
  nlohmann::ordered_json j;
  j["id"] = std::string(cert_name(c.id));
  j["k"] = c.k ? nlohmann::ordered_json(*c.k) : nlohmann::ordered_json(nullptr);
  j["kappa"] = c.kappa ? nlohmann::ordered_json(*c.kappa) : nlohmann::ordered_json(nullptr);
  j["applicable"] = c.applicable;
  j["bound"] = std::isnan(c.bound_value) ? nlohmann::ordered_json(nullptr)
                                         : nlohmann::ordered_json(c.bound_value);
  j["actual"] =
      std::isnan(c.actual) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(c.actual);
  j["margin"] =
      std::isnan(c.margin) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(c.margin);
  j["flags"] = c.flags;
  return j;
}

inline void emit_jsonl(const std::vector<BoundCertificate>& certs, std::ostream& os) {
  for (const auto& c : certs) os << to_json(c).dump() << '\n';
  if (!os) throw std::runtime_error("emit_jsonl: write failed");
}

inline nlohmann::ordered_json to_json(const DivergenceReport& r) {
  nlohmann::ordered_json j;
  j["tv"] = r.tv;
  j["kl"] = r.kl;
  j["chi2"] = r.chi2;
  j["kolmogorov"] = r.kolmogorov;
  j["sup_density"] = r.sup_density;
  j["deltas"] = r.deltas;
  j["k_max"] = r.k_max;
  j["lambda"] = r.lambda;
  j["instance_hash"] = r.hash;
  j["flags"] = r.floor_flags;
  return j;
}

inline nlohmann::ordered_json to_json(const VerificationReport& r) {
  nlohmann::ordered_json j;
  j["instances"] = r.instances;
  j["slack"] = r.slack;
  j["ok"] = r.ok();
  j["sup_chi2_ratio_small_lambda"] = r.sup_chi2_ratio_small_lambda;
  nlohmann::ordered_json sums = nlohmann::ordered_json::array();
  for (const auto& s : r.summaries) {
    nlohmann::ordered_json e;
    e["id"] = std::string(cert_name(s.id));
    e["evaluations"] = s.evaluations;
    e["applicable"] = s.applicable;
    e["worst_margin"] = std::isfinite(s.worst_margin) ? nlohmann::ordered_json(s.worst_margin)
                                                      : nlohmann::ordered_json(nullptr);
    e["worst_rel_margin"] = std::isfinite(s.worst_rel_margin)
                                ? nlohmann::ordered_json(s.worst_rel_margin)
                                : nlohmann::ordered_json(nullptr);
    sums.push_back(std::move(e));
  }
  j["certificates"] = std::move(sums);
  nlohmann::ordered_json viols = nlohmann::ordered_json::array();
  for (const auto& v : r.violations) {
    nlohmann::ordered_json e;
    e["instance_index"] = v.instance_index;
    e["id"] = std::string(cert_name(v.id));
    e["k"] = v.k ? nlohmann::ordered_json(*v.k) : nlohmann::ordered_json(nullptr);
    e["kappa"] = v.kappa ? nlohmann::ordered_json(*v.kappa) : nlohmann::ordered_json(nullptr);
    e["margin"] = v.margin;
    e["bound"] = v.bound;
    e["actual"] = v.actual;
    e["instance_hash"] = v.instance_hash;
    viols.push_back(std::move(e));
  }
  j["violations"] = std::move(viols);
  return j;
}

/// Instances come as {"p": [...]}; entries may be JSON numbers or decimal
/// strings, the latter parsed with strtod so the shortest decimal
/// round-trips exactly.
inline BernoulliInstance instance_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("p") || !j["p"].is_array()) {
    throw std::domain_error("instance json must be an object with a \"p\" array");
  }
  std::vector<double> p;
  p.reserve(j["p"].size());
  for (const auto& e : j["p"]) {
    if (e.is_number()) {
      p.push_back(e.get<double>());
    } else if (e.is_string()) {
      const std::string s = e.get<std::string>();
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end == s.c_str() || *end != '\0') {
        throw std::domain_error("instance json: unparsable probability string \"" + s + "\"");
      }
      p.push_back(v);
    } else {
      throw std::domain_error("instance json: probabilities must be numbers or strings");
    }
  }
  return BernoulliInstance(std::move(p));
}

inline BernoulliInstance load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  nlohmann::json j;
  in >> j;
  return instance_from_json(j);
}

inline regime_kind regime_kind_from_string(const std::string& s) {
  for (regime_kind k : {regime_kind::iid, regime_kind::small_lambda, regime_kind::half_capped,
                        regime_kind::kappa_capped, regime_kind::sqrt_decay,
                        regime_kind::dominant}) {
    if (to_string(k) == s) return k;
  }
  throw std::domain_error("unknown regime kind \"" + s + "\"");
}

inline Regime regime_from_json(const nlohmann::json& j) {
  Regime r;
  if (!j.is_object() || !j.contains("kind")) {
    throw std::domain_error("regime json needs a \"kind\" field");
  }
  r.kind = regime_kind_from_string(j["kind"].get<std::string>());
  if (j.contains("seed")) r.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("n")) r.n = j["n"].get<std::size_t>();
  if (j.contains("lambda")) r.lambda = j["lambda"].get<double>();
  if (j.contains("kappa")) r.kappa = j["kappa"].get<double>();
  if (j.contains("p1")) r.p1 = j["p1"].get<double>();
  return r;
}

/// Verification run description:
///   {"seed": 42, "instances": 10000, "max_n": 200, "slack": 1e-9}
/// for the default corpus, or an explicit "regimes": [...] list (entries
/// without a seed get one derived from the base seed and their index).
struct VerifyConfig {
  std::vector<Regime> regimes;
  double slack = 1e-9;
};

inline VerifyConfig verify_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::domain_error("verify config must be a JSON object");
  VerifyConfig cfg;
  if (j.contains("slack")) cfg.slack = j["slack"].get<double>();
  const std::uint64_t base_seed = j.contains("seed") ? j["seed"].get<std::uint64_t>() : 42;
  if (j.contains("regimes")) {
    std::size_t index = 0;
    for (const auto& e : j["regimes"]) {
      Regime r = regime_from_json(e);
      if (!e.contains("seed")) {
        r.seed = detail::splitmix64(base_seed ^ (0x51ed2701ull * (index + 1)));
      }
      cfg.regimes.push_back(r);
      ++index;
    }
  } else {
    CorpusOptions copt;
    copt.seed = base_seed;
    if (j.contains("instances")) copt.instances = j["instances"].get<std::size_t>();
    if (j.contains("max_n")) copt.max_n = j["max_n"].get<std::size_t>();
    cfg.regimes = default_corpus(copt);
  }
  return cfg;
}

inline VerifyConfig load_verify_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  return verify_config_from_json(j);
}

}  // namespace poibin
