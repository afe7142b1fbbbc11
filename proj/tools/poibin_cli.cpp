// Command-line frontend: exact pmfs, distances, deviation sequences,
// bound certificates, corpus verification, sweeps, contour cross-checks.
//
// Exit codes: 0 success / no violations, 1 usage error,
//             2 verification violations, 3 numerical failure.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "poibin/poibin.hpp"
#include "poibin/report_io.hpp"

namespace {

using namespace poibin;

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_violations = 2;
constexpr int exit_numerical = 3;

std::vector<double> parse_p_list(const std::string& csv) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const std::size_t comma = csv.find(',', pos);
    const std::string tok = csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (tok.empty()) throw std::domain_error("empty probability token");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') {
      throw std::domain_error("unparsable probability \"" + tok + "\"");
    }
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

struct instance_source {
  std::string inline_p;
  std::string file;

  void attach(CLI::App* cmd) {
    auto* a = cmd->add_option("--p", inline_p, "comma-separated success probabilities");
    auto* b = cmd->add_option("--file", file, "JSON instance file {\"p\": [...]}");
    a->excludes(b);
    b->excludes(a);
  }

  BernoulliInstance load() const {
    if (!inline_p.empty()) return BernoulliInstance(parse_p_list(inline_p));
    if (!file.empty()) return load_instance_file(file);
    throw std::domain_error("exactly one of --p / --file is required");
  }
};

void print_table_row(std::ostream& os, const std::vector<std::string>& cells,
                     const std::vector<std::size_t>& widths) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    os << std::setw(static_cast<int>(widths[i]) + 2) << cells[i];
  }
  os << '\n';
}

void print_table(std::ostream& os, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) widths[i] = header[i].size();
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) widths[i] = std::max(widths[i], r[i].size());
  }
  print_table_row(os, header, widths);
  for (const auto& r : rows) print_table_row(os, r, widths);
}

void print_sweep(const SweepTable& t, const std::string& format, std::ostream& os) {
  if (format == "json") {
    os << to_json(t).dump(2) << '\n';
    return;
  }
  // sweeps are table-shaped; CSV is the default machine format
  emit_csv(t, os);
}

int cmd_pmf(const instance_source& src, const std::string& format) {
  const BernoulliInstance inst = src.load();
  const instance_context ctx(inst);
  const auto& w = ctx.pmf.weights();
  if (format == "json") {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < w.size(); ++k) {
      nlohmann::ordered_json row;
      row["k"] = k;
      row["w_k"] = w[k];
      row["v_k"] = ctx.f(static_cast<std::int64_t>(k));
      row["delta"] = ctx.delta(static_cast<std::int64_t>(k));
      rows.push_back(std::move(row));
    }
    std::cout << rows.dump(2) << '\n';
    return exit_ok;
  }
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < w.size(); ++k) {
    rows.push_back({std::to_string(k), format_shortest(w[k]),
                    format_shortest(ctx.f(static_cast<std::int64_t>(k))),
                    format_shortest(ctx.delta(static_cast<std::int64_t>(k)))});
  }
  if (format == "csv") {
    std::cout << "\"k\",\"w_k\",\"v_k\",\"delta\"\n";
    for (const auto& r : rows) {
      std::cout << r[0] << ',' << r[1] << ',' << r[2] << ',' << r[3] << '\n';
    }
  } else {
    print_table(std::cout, {"k", "w_k", "v_k", "delta"}, rows);
  }
  return exit_ok;
}

int cmd_stats(const instance_source& src, const std::string& format) {
  const BernoulliInstance inst = src.load();
  const InstanceStats st = pb_stats(inst);
  nlohmann::ordered_json j;
  j["n"] = inst.n();
  j["lambda"] = st.lambda;
  j["lambda2"] = st.lambda2;
  j["lambda3"] = st.lambda3;
  j["variance"] = st.variance;
  j["max_p"] = st.max_p;
  j["kappa_eff"] = st.kappa_eff ? nlohmann::ordered_json(*st.kappa_eff)
                                : nlohmann::ordered_json(nullptr);
  j["F"] = st.F;
  if (format == "json") {
    std::cout << j.dump(2) << '\n';
  } else {
    for (const auto& [key, value] : j.items()) {
      std::cout << key << " = " << (value.is_null() ? "undefined" : value.dump()) << '\n';
    }
  }
  return exit_ok;
}

int cmd_distances(const instance_source& src, const std::string& format, std::int64_t k_max) {
  const BernoulliInstance inst = src.load();
  const DivergenceReport rep = divergence_report(inst, k_max);
  if (format == "json") {
    std::cout << to_json(rep).dump(2) << '\n';
    return exit_ok;
  }
  std::cout << "tv          = " << format_shortest(rep.tv) << '\n'
            << "kl          = " << format_shortest(rep.kl) << '\n'
            << "chi2        = " << format_shortest(rep.chi2) << '\n'
            << "kolmogorov  = " << format_shortest(rep.kolmogorov) << '\n'
            << "sup_density = " << format_shortest(rep.sup_density) << '\n';
  if (!rep.floor_flags.empty()) {
    std::cout << "flags       =";
    for (const auto& f : rep.floor_flags) std::cout << ' ' << f;
    std::cout << '\n';
  }
  return exit_ok;
}

int cmd_delta(const instance_source& src, const std::string& format, std::int64_t k_max) {
  const BernoulliInstance inst = src.load();
  if (k_max < 0) k_max = default_k_max(inst);
  const auto deltas = delta_sequence(inst, k_max);
  if (format == "json") {
    std::cout << nlohmann::ordered_json(deltas).dump(2) << '\n';
    return exit_ok;
  }
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    rows.push_back({std::to_string(k), format_shortest(deltas[k])});
  }
  print_table(std::cout, {"k", "delta_k"}, rows);
  return exit_ok;
}

int cmd_bounds(const instance_source& src, const std::string& format, const std::string& ids_csv,
               const std::string& k_range, std::optional<double> kappa, double slack) {
  const BernoulliInstance inst = src.load();
  const instance_context ctx(inst);

  std::vector<cert_id> ids;
  if (ids_csv.empty()) {
    ids = all_cert_ids();
  } else {
    std::size_t pos = 0;
    while (pos <= ids_csv.size()) {
      const std::size_t comma = ids_csv.find(',', pos);
      const std::string tok =
          ids_csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      const auto id = parse_cert_id(tok);
      if (!id) {
        std::cerr << "unknown certificate id \"" << tok << "\"; valid ids:";
        for (const auto& e : cert_table) std::cerr << ' ' << e.name;
        std::cerr << '\n';
        return exit_usage;
      }
      ids.push_back(*id);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }

  std::int64_t k_lo = 0;
  std::int64_t k_hi = static_cast<std::int64_t>(inst.n()) +
                      static_cast<std::int64_t>(std::ceil(10.0 * std::sqrt(std::max(ctx.stats.lambda, 0.0))));
  if (!k_range.empty()) {
    const auto colon = k_range.find(':');
    if (colon == std::string::npos) {
      k_lo = k_hi = std::atoll(k_range.c_str());
    } else {
      k_lo = std::atoll(k_range.substr(0, colon).c_str());
      k_hi = std::atoll(k_range.substr(colon + 1).c_str());
    }
    if (k_lo < 0 || k_hi < k_lo) {
      std::cerr << "bad --k-range\n";
      return exit_usage;
    }
  }

  std::vector<BoundCertificate> certs;
  for (cert_id id : ids) {
    const auto& ci = info(id);
    std::optional<double> kap;
    if (ci.needs_kappa) {
      kap = kappa ? kappa : default_kappa(ctx.stats);
      if (!kap) {
        auto c = BoundCertificate{};
        c.id = id;
        c.flags.push_back("kappa-eff-above-0.9");
        certs.push_back(std::move(c));
        continue;
      }
    }
    if (!ci.per_k) {
      certs.push_back(evaluate_certificate(id, ctx, std::nullopt, kap));
    } else {
      for (std::int64_t k = k_lo; k <= k_hi; ++k) {
        certs.push_back(evaluate_certificate(id, ctx, k, kap));
      }
    }
  }

  bool violated = false;
  for (const auto& c : certs) violated = violated || is_violation(c, slack);

  if (format == "json") {
    emit_jsonl(certs, std::cout);
  } else {
    std::vector<std::vector<std::string>> rows;
    for (const auto& c : certs) {
      std::string flags;
      for (const auto& f : c.flags) flags += (flags.empty() ? "" : ",") + f;
      rows.push_back({std::string(cert_name(c.id)),
                      c.k ? std::to_string(*c.k) : "-",
                      c.kappa ? format_shortest(*c.kappa) : "-",
                      c.applicable ? "yes" : "no",
                      std::isnan(c.bound_value) ? "-" : format_shortest(c.bound_value),
                      std::isnan(c.actual) ? "-" : format_shortest(c.actual),
                      std::isnan(c.margin) ? "-" : format_shortest(c.margin),
                      flags});
    }
    print_table(std::cout, {"id", "k", "kappa", "applicable", "bound", "actual", "margin", "flags"},
                rows);
  }
  return violated ? exit_violations : exit_ok;
}

int cmd_verify(const std::string& format, std::size_t instances, std::size_t max_n,
               std::uint64_t seed, double slack, unsigned threads, const std::string& emit_path,
               const std::string& config_path) {
  std::vector<Regime> corpus;
  if (!config_path.empty()) {
    const VerifyConfig cfg = load_verify_config(config_path);
    corpus = cfg.regimes;
    slack = cfg.slack;
  } else {
    CorpusOptions copt;
    copt.instances = instances;
    copt.max_n = max_n;
    copt.seed = seed;
    corpus = default_corpus(copt);
  }

  VerifyOptions vopt;
  vopt.slack = slack;
  vopt.threads = threads;
  std::ofstream emit;
  if (!emit_path.empty()) {
    emit.open(emit_path);
    if (!emit) {
      std::cerr << "cannot open " << emit_path << " for writing\n";
      return exit_usage;
    }
    vopt.sink = [&emit](std::size_t idx, const instance_context&, const BoundCertificate& c) {
      auto j = to_json(c);
      j["instance_index"] = idx;
      emit << j.dump() << '\n';
    };
  }

  const VerificationReport rep = run_verification(corpus, vopt);
  if (format == "json") {
    std::cout << to_json(rep).dump(2) << '\n';
  } else {
    std::cout << "instances: " << rep.instances << "  slack: " << format_shortest(rep.slack)
              << '\n';
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : rep.summaries) {
      rows.push_back({std::string(cert_name(s.id)), std::to_string(s.evaluations),
                      std::to_string(s.applicable),
                      std::isfinite(s.worst_margin) ? format_shortest(s.worst_margin) : "-",
                      std::isfinite(s.worst_rel_margin) ? format_shortest(s.worst_rel_margin)
                                                        : "-"});
    }
    print_table(std::cout, {"id", "evaluated", "applicable", "worst_margin", "worst_rel_margin"},
                rows);
    std::cout << "sup chi2*(lambda/lambda2)^2 on {lambda<=1/2, max_p<=1/2}: "
              << format_shortest(rep.sup_chi2_ratio_small_lambda) << '\n';
    std::cout << "violations: " << rep.violations.size() << '\n';
    for (const auto& v : rep.violations) {
      std::cout << "  instance " << v.instance_index << " " << cert_name(v.id);
      if (v.k) std::cout << " k=" << *v.k;
      std::cout << " margin=" << format_shortest(v.margin) << '\n';
    }
  }
  return rep.ok() ? exit_ok : exit_violations;
}

int cmd_contour_check(const instance_source& src, const std::string& radii_csv, std::size_t m,
                      double tol) {
  const BernoulliInstance inst = src.load();
  const Pmf reference = pb_pmf(inst);
  std::vector<double> radii = radii_csv.empty() ? std::vector<double>{0.5, 1.0, 2.0}
                                                : parse_p_list(radii_csv);
  bool ok = true;
  for (double r : radii) {
    ContourConfig cfg;
    cfg.r = r;
    cfg.m = m;
    const Pmf inv = pb_pmf_via_dft(inst, cfg);
    double worst = 0.0;
    for (std::size_t k = 0; k <= reference.n(); ++k) {
      worst = std::max(worst, std::abs(inv[k] - reference[k]));
    }
    std::cout << "r=" << format_shortest(r) << " max|dft-dp|=" << format_shortest(worst) << '\n';
    ok = ok && worst <= tol;
  }
  if (!ok) {
    std::cerr << "contour-check: disagreement above " << format_shortest(tol) << '\n';
    return exit_numerical;
  }
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"poibin: exact Poisson-binomial vs Poisson distances and bound certificates"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string format = "table";
  app.add_option("--format", format, "output format: table|json|csv")
      ->check(CLI::IsMember({"table", "json", "csv"}));
  std::uint64_t seed = 42;
  app.add_option("--seed", seed, "base seed for seeded commands")->envname("POIBIN_SEED");

  instance_source pmf_src, stats_src, dist_src, delta_src, bounds_src, contour_src;

  auto* c_pmf = app.add_subcommand("pmf", "exact pmf of W next to the Poisson masses");
  pmf_src.attach(c_pmf);

  auto* c_stats = app.add_subcommand("stats", "lambda, power sums, variance, kappa_eff, F");
  stats_src.attach(c_stats);

  auto* c_dist = app.add_subcommand("distances", "tv, kl, chi2, kolmogorov, sup-density");
  dist_src.attach(c_dist);
  std::int64_t dist_kmax = -1;
  c_dist->add_option("--kmax", dist_kmax, "delta cut-off (default n + 10 sqrt(lambda) + 10)");

  auto* c_delta = app.add_subcommand("delta", "deviation sequence Delta_k");
  delta_src.attach(c_delta);
  std::int64_t delta_kmax = -1;
  c_delta->add_option("--kmax", delta_kmax, "cut-off");

  auto* c_bounds = app.add_subcommand("bounds", "evaluate bound certificates");
  bounds_src.attach(c_bounds);
  std::string ids_csv, k_range;
  double bounds_slack = 1e-9;
  std::optional<double> kappa;
  double kappa_val = 0.0;
  c_bounds->add_option("--ids", ids_csv, "comma-separated certificate ids (default: all)");
  c_bounds->add_option("--k-range", k_range, "k range LO:HI for per-k certificates");
  auto* kopt = c_bounds->add_option("--kappa", kappa_val, "kappa for COR61/PROP62");
  c_bounds->add_option("--slack", bounds_slack, "relative violation slack");

  auto* c_verify = app.add_subcommand("verify", "seeded corpus-wide certificate verification");
  std::size_t v_instances = 10000, v_max_n = 200;
  double v_slack = 1e-9;
  unsigned v_threads = 0;
  std::string corpus_name = "default", emit_path;
  c_verify->add_option("--corpus", corpus_name, "corpus name")->check(CLI::IsMember({"default"}));
  c_verify->add_option("--instances", v_instances, "corpus size");
  c_verify->add_option("--max-n", v_max_n, "largest n");
  c_verify->add_option("--slack", v_slack, "relative violation slack");
  c_verify->add_option("--threads", v_threads, "worker threads (0 = hardware)");
  c_verify->add_option("--emit", emit_path, "stream every certificate as JSON lines to this file");
  std::string config_path;
  c_verify->add_option("--config", config_path,
                       "JSON config with seed/instances/max_n/slack or an explicit regimes list");

  auto* c_sweep = app.add_subcommand("sweep", "rate/comparison experiments");
  c_sweep->require_subcommand(1);
  auto* c_iid = c_sweep->add_subcommand("iid-rate", "i.i.d. refinement at fixed lambda");
  double sweep_lambda = 1.0;
  std::string iid_ns = "50,100,200,400";
  c_iid->add_option("--lambda", sweep_lambda, "fixed lambda");
  c_iid->add_option("--n", iid_ns, "comma-separated n list");
  auto* c_norm = c_sweep->add_subcommand("normal-comparison", "sqrt-decay example vs normal scale");
  std::string norm_ns = "16,64,256,1024,4096";
  c_norm->add_option("--n", norm_ns, "comma-separated n list");

  auto* c_contour = app.add_subcommand("contour-check", "DFT inversion vs convolution pmf");
  contour_src.attach(c_contour);
  std::string radii = "0.5,1,2";
  std::size_t contour_m = 0;
  double contour_tol = 1e-10;
  c_contour->add_option("--r", radii, "comma-separated radii");
  c_contour->add_option("--m", contour_m, "grid points (default: smallest power of two > n)");
  c_contour->add_option("--tol", contour_tol, "max-abs tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return exit_usage;
  }

  try {
    if (kopt->count() > 0) kappa = kappa_val;
    if (c_pmf->parsed()) return cmd_pmf(pmf_src, format);
    if (c_stats->parsed()) return cmd_stats(stats_src, format);
    if (c_dist->parsed()) return cmd_distances(dist_src, format, dist_kmax);
    if (c_delta->parsed()) return cmd_delta(delta_src, format, delta_kmax);
    if (c_bounds->parsed()) {
      return cmd_bounds(bounds_src, format, ids_csv, k_range, kappa, bounds_slack);
    }
    if (c_verify->parsed()) {
      return cmd_verify(format, v_instances, v_max_n, seed, v_slack, v_threads, emit_path,
                        config_path);
    }
    if (c_sweep->parsed()) {
      auto parse_ns = [](const std::string& csv) {
        std::vector<std::size_t> out;
        for (double v : parse_p_list(csv)) out.push_back(static_cast<std::size_t>(v));
        return out;
      };
      SweepTable t = c_iid->parsed() ? sweep_iid_rate(sweep_lambda, parse_ns(iid_ns))
                                     : sweep_normal_comparison(parse_ns(norm_ns));
      print_sweep(t, format, std::cout);
      return t.assertions_ok ? exit_ok : exit_violations;
    }
    if (c_contour->parsed()) {
      return cmd_contour_check(contour_src, radii, contour_m, contour_tol);
    }
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  }
  return exit_usage;
}
