#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "poibin/harness.hpp"
#include "poibin/report_io.hpp"

using namespace poibin;
using Catch::Approx;

TEST_CASE("regime generation honours predicates and determinism") {
  Regime iid;
  iid.kind = regime_kind::iid;
  iid.lambda = 1.0;
  iid.n = 100;
  const auto inst = gen_instance(iid);
  REQUIRE(inst.n() == 100);
  for (double p : inst.p()) CHECK(p == 0.01);

  Regime decay;
  decay.kind = regime_kind::sqrt_decay;
  decay.n = 4;
  const auto d = gen_instance(decay);
  CHECK(d.p()[0] == Approx(0.5).margin(1e-16));
  CHECK(d.p()[1] == Approx(0.35355339059327379).epsilon(1e-15));
  CHECK(d.p()[2] == Approx(0.28867513459481288).epsilon(1e-15));
  CHECK(d.p()[3] == Approx(0.25).margin(1e-16));

  Regime sl;
  sl.kind = regime_kind::small_lambda;
  sl.n = 5;
  sl.seed = 7;
  const auto s = gen_instance(sl);
  CHECK(pb_stats(s).lambda <= 0.5);
  // deterministic in (kind, parameters, seed)
  const auto s2 = gen_instance(sl);
  CHECK(s.p() == s2.p());
  sl.seed = 8;
  CHECK(gen_instance(sl).p() != s.p());

  Regime kc;
  kc.kind = regime_kind::kappa_capped;
  kc.kappa = 0.75;
  kc.n = 40;
  kc.seed = 3;
  const auto k = gen_instance(kc);
  const auto kst = pb_stats(k);
  CHECK(kst.lambda2 <= 0.75 * kst.lambda);

  Regime dom;
  dom.kind = regime_kind::dominant;
  dom.p1 = 0.8;
  dom.n = 6;
  dom.seed = 11;
  const auto dm = gen_instance(dom);
  CHECK(dm.p().front() == 0.8);
  CHECK(pb_stats(dm).max_p == 0.8);

  Regime hc;
  hc.kind = regime_kind::half_capped;
  hc.n = 12;
  hc.seed = 5;
  CHECK(pb_stats(gen_instance(hc)).max_p <= 0.5);

  // impossible parameters
  Regime bad;
  bad.kind = regime_kind::iid;
  bad.lambda = 5.0;
  bad.n = 3;
  CHECK_THROWS_AS(gen_instance(bad), std::domain_error);
}

TEST_CASE("small corpus verification is clean and deterministic") {
  CorpusOptions copt;
  copt.instances = 120;
  copt.max_n = 60;
  copt.seed = 42;
  const auto corpus = default_corpus(copt);
  REQUIRE(corpus.size() == 120);

  VerifyOptions one;
  one.threads = 1;
  const auto rep1 = run_verification(corpus, one);
  CHECK(rep1.instances == 120);
  CHECK(rep1.ok());
  CHECK(rep1.violations.empty());
  CHECK(rep1.sup_chi2_ratio_small_lambda > 0.0);
  CHECK(rep1.sup_chi2_ratio_small_lambda < 15.0);

  VerifyOptions four;
  four.threads = 4;
  const auto rep4 = run_verification(corpus, four);
  CHECK(to_json(rep1).dump() == to_json(rep4).dump());

  // per-certificate worst margins are finite where anything applied
  for (const auto& s : rep1.summaries) {
    if (s.applicable > 0 && s.id != cert_id::be_lyapunov) {
      CHECK(s.worst_margin >= 0.0);
    }
  }
}

TEST_CASE("streaming sink sees every certificate in order") {
  CorpusOptions copt;
  copt.instances = 6;
  copt.max_n = 12;
  const auto corpus = default_corpus(copt);
  VerifyOptions opt;
  std::size_t count = 0;
  std::size_t last_idx = 0;
  opt.sink = [&](std::size_t idx, const instance_context&, const BoundCertificate&) {
    CHECK(idx >= last_idx);
    last_idx = idx;
    ++count;
  };
  const auto rep = run_verification(corpus, opt);
  CHECK(count > 0);
  std::size_t total = 0;
  for (const auto& s : rep.summaries) total += s.evaluations;
  CHECK(count == total);
}

TEST_CASE("iid rate sweep") {
  const auto t = sweep_iid_rate(1.0, {50, 100, 200, 400});
  REQUIRE(t.rows.size() == 4);
  CHECK(t.assertions_ok);

  // frozen rate ratios 4 n^2 D
  CHECK(std::get<double>(t.rows[0][6]) == Approx(1.0204096118180747).epsilon(1e-9));
  CHECK(std::get<double>(t.rows[1][6]) == Approx(1.0101011837511412).epsilon(1e-9));
  CHECK(std::get<double>(t.rows[2][6]) == Approx(1.0050251468914227).epsilon(1e-9));
  CHECK(std::get<double>(t.rows[3][6]) == Approx(1.0025062682949994).epsilon(1e-9));
  for (const auto& row : t.rows) {
    CHECK(std::get<bool>(row[5]));  // in_interval
    CHECK(std::get<bool>(row[8]));  // gap_nonincreasing
  }

  // p = 1 edge row is flagged, not asserted
  const auto edge = sweep_iid_rate(1.0, {1, 2, 4});
  CHECK(std::get<std::string>(edge.rows[0][5]) == "hr-inapplicable:p=1");
  CHECK_FALSE(edge.notes.empty());

  CHECK_THROWS_AS(sweep_iid_rate(4.0, {2}), std::domain_error);
}

TEST_CASE("normal comparison sweep") {
  const auto t = sweep_normal_comparison({16, 64});
  REQUIRE(t.rows.size() == 2);
  CHECK(std::get<double>(t.rows[0][1]) == Approx(3.3319973041187215).epsilon(1e-12));
  CHECK(std::get<double>(t.rows[0][2]) == Approx(0.84518224830724831).epsilon(1e-12));
  CHECK(std::get<bool>(t.rows[0][6]));  // lambda2 <= lambda/2 here
  CHECK(std::get<double>(t.rows[1][1]) == Approx(7.3010320561118648).epsilon(1e-12));
  // M, L3, ratios all populated and positive
  for (const auto& row : t.rows) {
    CHECK(std::get<double>(row[4]) > 0.0);
    CHECK(std::get<double>(row[8]) > 0.0);
    CHECK(std::get<double>(row[10]) > 0.0);
  }
}

TEST_CASE("csv and json emission") {
  const auto t = sweep_iid_rate(1.0, {50, 100});
  std::ostringstream a, b;
  emit_csv(t, a);
  emit_csv(t, b);
  CHECK(a.str() == b.str());  // bit-stable
  CHECK(a.str().find("\"n\",\"p\",\"D\"") == 0);
  CHECK(a.str().find("gap_nonincreasing") != std::string::npos);

  const auto j = to_json(t);
  CHECK(j["rows"].size() == 2);
  CHECK(j["assertions_ok"].get<bool>());

  // certificate JSON lines carry exactly the interface fields
  const auto cert = evaluate_certificate(cert_id::le_cam, BernoulliInstance({0.3}));
  const auto cj = to_json(cert);
  CHECK(cj.size() == 8);
  for (const char* key : {"id", "k", "kappa", "applicable", "bound", "actual", "margin", "flags"}) {
    CHECK(cj.contains(key));
  }
  std::ostringstream lines;
  emit_jsonl({cert, cert}, lines);
  const std::string emitted = lines.str();
  CHECK(std::count(emitted.begin(), emitted.end(), '\n') == 2);
}

TEST_CASE("shortest round-trip formatting") {
  CHECK(format_shortest(0.1) == "0.1");
  CHECK(format_shortest(1.0 / 3.0) == "0.3333333333333333");
  CHECK(format_shortest(1e300) == "1e+300");
  const double v = 0.72000000000000013;
  CHECK(std::strtod(format_shortest(v).c_str(), nullptr) == v);
}

TEST_CASE("verify config parsing") {
  const auto explicit_cfg = verify_config_from_json(nlohmann::json::parse(R"({
    "seed": 5, "slack": 1e-8,
    "regimes": [{"kind": "iid", "n": 20, "lambda": 2.0},
                {"kind": "kappa_capped", "n": 10, "kappa": 0.5, "seed": 3}]
  })"));
  REQUIRE(explicit_cfg.regimes.size() == 2);
  CHECK(explicit_cfg.slack == 1e-8);
  CHECK(explicit_cfg.regimes[0].kind == regime_kind::iid);
  CHECK(explicit_cfg.regimes[0].lambda == 2.0);
  CHECK(explicit_cfg.regimes[0].seed != 0);  // derived from the base seed
  CHECK(explicit_cfg.regimes[1].seed == 3);
  CHECK(run_verification(explicit_cfg.regimes).ok());

  const auto corpus_cfg = verify_config_from_json(nlohmann::json::parse(
      R"({"seed": 11, "instances": 18, "max_n": 9})"));
  CHECK(corpus_cfg.regimes.size() == 18);

  CHECK_THROWS_AS(verify_config_from_json(nlohmann::json::parse(
                      R"({"regimes": [{"kind": "nope"}]})")),
                  std::domain_error);
  CHECK_THROWS_AS(regime_from_json(nlohmann::json::parse(R"({"n": 4})")), std::domain_error);
}

TEST_CASE("instance json parsing") {
  const auto j = nlohmann::json::parse(R"({"p": [0.1, "0.2", 0.3]})");
  const auto inst = instance_from_json(j);
  REQUIRE(inst.n() == 3);
  CHECK(inst.p()[0] == 0.1);
  CHECK(inst.p()[1] == 0.2);  // decimal string round-trips exactly
  CHECK(inst.p()[2] == 0.3);

  CHECK_THROWS_AS(instance_from_json(nlohmann::json::parse(R"({"q": []})")),
                  std::domain_error);
  CHECK_THROWS_AS(instance_from_json(nlohmann::json::parse(R"({"p": ["zzz"]})")),
                  std::domain_error);
  CHECK_THROWS_AS(instance_from_json(nlohmann::json::parse(R"({"p": [true]})")),
                  std::domain_error);

  // divergence report serialisation carries provenance
  const auto rep = divergence_report(inst);
  const auto rj = to_json(rep);
  CHECK(rj.contains("instance_hash"));
  CHECK(rj["k_max"].get<std::int64_t>() == rep.k_max);
}
