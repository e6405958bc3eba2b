#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "qct/adversary.hpp"
#include "qct/protocol.hpp"
#include "qct/report.hpp"

using namespace qct;
using report::Json;

namespace {

protocol::ProtocolConfig custom_config() {
  protocol::ProtocolConfig cfg;
  cfg.total_pairs = 120;
  cfg.alice_check_pairs = 20;
  cfg.bob_check_pairs = 30;
  cfg.axis_policy = protocol::AxisPolicy::fixed(qsim::axis_x());
  cfg.verdict_mode = protocol::VerdictMode::ClaimedOrder;
  cfg.thresholds = protocol::Thresholds{0.8, 0.6};
  cfg.noise = {0.05, 0.1, 0.25, 0.0, 0.5};
  cfg.seed = 987654321;
  return cfg;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& text) {
    path = std::string("qct_test_cfg_") + std::to_string(::getpid()) + ".json";
    std::ofstream(path) << text;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("config json round-trip preserves every field") {
  for (const auto& cfg : {protocol::ProtocolConfig{}, custom_config()}) {
    const Json j = report::config_json(cfg);
    const protocol::ProtocolConfig back = report::config_from_json(j);
    CHECK(back.total_pairs == cfg.total_pairs);
    CHECK(back.alice_check_pairs == cfg.alice_check_pairs);
    CHECK(back.bob_check_pairs == cfg.bob_check_pairs);
    CHECK(back.axis_policy.kind == cfg.axis_policy.kind);
    CHECK(qsim::same_axis(back.axis_policy.fixed_axis, cfg.axis_policy.fixed_axis));
    CHECK(back.verdict_mode == cfg.verdict_mode);
    CHECK(back.thresholds.has_value() == cfg.thresholds.has_value());
    if (cfg.thresholds) {
      CHECK(back.thresholds->hi == cfg.thresholds->hi);
      CHECK(back.thresholds->lo == cfg.thresholds->lo);
    }
    CHECK(back.noise.env_a == cfg.noise.env_a);
    CHECK(back.noise.env_b == cfg.noise.env_b);
    CHECK(back.noise.self_a == cfg.noise.self_a);
    CHECK(back.noise.self_b == cfg.noise.self_b);
    CHECK(back.noise.detector_advantage == cfg.noise.detector_advantage);
    CHECK(back.seed == cfg.seed);
  }
}

TEST_CASE("config parsing applies defaults and rejects junk strictly") {
  const protocol::ProtocolConfig dflt = report::config_from_json(Json::object());
  CHECK(dflt.total_pairs == 300);
  CHECK(dflt.alice_check_pairs == 50);
  CHECK(dflt.bob_check_pairs == 50);
  CHECK(dflt.verdict_mode == protocol::VerdictMode::DualOrder);
  CHECK_FALSE(dflt.thresholds.has_value());
  CHECK(dflt.seed == 1);

  CHECK_THROWS_AS(report::config_from_json(Json::parse(R"({"bogus": 1})")),
                  protocol::ConfigError);
  CHECK_THROWS_AS(report::config_from_json(Json::parse(R"({"N": "many"})")),
                  protocol::ConfigError);
  CHECK_THROWS_AS(report::config_from_json(Json::parse(R"({"N": 250.5})")),
                  protocol::ConfigError);
  CHECK_THROWS_AS(report::config_from_json(Json::parse(R"({"noise": {"env_c": 0.1}})")),
                  protocol::ConfigError);
  CHECK_THROWS_AS(report::config_from_json(Json::parse(R"({"noise": {"env_a": 1.5}})")),
                  protocol::ConfigError);
  CHECK_THROWS_AS(report::config_from_json(Json::parse(R"({"theta_hi": 0.9})")),
                  protocol::ConfigError);
  CHECK_THROWS_AS(report::config_from_json(Json::parse(R"({"theta_hi": 0.6, "theta_lo": 0.9})")),
                  protocol::ConfigError);
  CHECK_THROWS_AS(report::config_from_json(Json::parse(R"({"seed": -4})")),
                  protocol::ConfigError);
  CHECK_THROWS_AS(report::config_from_json(Json::parse(R"({"verdict_mode": "fuzzy"})")),
                  protocol::ConfigError);
  CHECK_THROWS_AS(report::config_from_json(Json::parse(R"({"axis_policy": "diagonal"})")),
                  protocol::ConfigError);
  CHECK_THROWS_AS(
      report::config_from_json(Json::parse(R"({"axis_policy": {"fixed": [1, 0]}})")),
      protocol::ConfigError);
  CHECK_THROWS_AS(
      report::config_from_json(Json::parse(R"({"axis_policy": {"fixed": [2, 0, 0]}})")),
      protocol::ConfigError);
  CHECK_THROWS_AS(report::config_from_json(Json::parse(R"({"N": 60, "n_a": 40, "n_b": 30})")),
                  protocol::ConfigError);

  const protocol::ProtocolConfig nulls =
      report::config_from_json(Json::parse(R"({"theta_hi": null, "theta_lo": null})"));
  CHECK_FALSE(nulls.thresholds.has_value());
}

TEST_CASE("config files load with parse diagnostics") {
  TempFile good(R"({"N": 80, "n_a": 10, "n_b": 10, "seed": 5})");
  const protocol::ProtocolConfig cfg = report::load_config_file(good.path);
  CHECK(cfg.total_pairs == 80);
  CHECK(cfg.seed == 5);
  CHECK_THROWS_AS(report::load_config_file("definitely_missing.json"), protocol::ConfigError);
  TempFile bad("{not json");
  CHECK_THROWS_AS(report::load_config_file(bad.path), protocol::ConfigError);
}

TEST_CASE("run reports validate and reproduce byte-identically") {
  protocol::ProtocolConfig cfg;
  cfg.seed = 31337;
  const protocol::RunResult res = protocol::run_honest(cfg, 1);
  const Json j = report::run_report(cfg, res);
  CHECK_NOTHROW(report::validate_report(j));
  CHECK(j.at("kind") == "run");
  CHECK(j.at("seed").get<std::uint64_t>() == 31337);
  CHECK(j.at("verdict").at("outcome") == "bit1");
  CHECK(j.at("verdict").at("f_reverse").get<double>() == 1.0);
  CHECK(j.at("verdict").at("theta_hi").get<double>() == 0.90);
  CHECK(j.at("coin").is_null());
  CHECK(j.at("transcript").size() == res.transcript.size());

  const protocol::RunResult res2 = protocol::run_honest(cfg, 1);
  const Json j2 = report::run_report(cfg, res2);
  CHECK(report::render(j) == report::render(j2));

  protocol::ProtocolConfig other = cfg;
  other.seed = 31338;
  const Json j3 = report::run_report(other, protocol::run_honest(other, 1));
  CHECK(report::render(j) != report::render(j3));
}

TEST_CASE("attack reports validate and carry the bias fields") {
  protocol::ProtocolConfig cfg;
  cfg.total_pairs = 60;
  cfg.alice_check_pairs = 10;
  cfg.bob_check_pairs = 10;
  cfg.seed = 99;
  const auto bias = adversary::estimate_bias(cfg, adversary::AliceStrategy::Honest,
                                             adversary::BobStrategy::HonestGuess,
                                             adversary::SuppressionMode::Both, 150, 99, 1);
  const Json j = report::attack_report(cfg, bias);
  CHECK_NOTHROW(report::validate_report(j));
  CHECK(j.at("kind") == "attack");
  CHECK(j.at("attack").at("alice") == "honest");
  CHECK(j.at("attack").at("runs").get<int>() == 150);
  CHECK(j.at("bias").at("outcome_one").get<int>() == bias.outcome_one);
  CHECK(j.at("bias").at("epsilon_bob_all").at("half_width").get<double>() ==
        bias.eps_bob_all.half_width);
  CHECK(j.at("diagnostics").at("verdict_runs").get<int>() == bias.verdict_runs);

  const auto bias3 = adversary::estimate_bias(cfg, adversary::AliceStrategy::Honest,
                                              adversary::BobStrategy::HonestGuess,
                                              adversary::SuppressionMode::Both, 150, 99, 3);
  CHECK(report::render(report::attack_report(cfg, bias3)) == report::render(j));
}

TEST_CASE("sweep csv and report share rows and validate") {
  std::vector<report::SweepRow> rows = {{0.0, 1.0, 0.0, 1.0, 0.5, 50.25},
                                        {0.1, 0.998, 0.002, 0.95, 0.5, 49.5}};
  const std::string csv = report::sweep_csv(rows);
  CHECK(csv == "value,success_rate,abort_rate,f_direct_mean,f_reverse_mean,singlet_mean\n"
               "0,1,0,1,0.5,50.25\n"
               "0.1,0.998,0.002,0.95,0.5,49.5\n");
  protocol::ProtocolConfig cfg;
  const Json j = report::sweep_report(cfg, "noise", 500, rows);
  CHECK_NOTHROW(report::validate_report(j));
  CHECK(j.at("sweep").at("rows").size() == 2);
  CHECK(j.at("sweep").at("rows")[1].at("value").get<double>() == 0.1);
}

TEST_CASE("schema validation rejects malformed documents") {
  protocol::ProtocolConfig cfg;
  const Json good = report::run_report(cfg, protocol::run_honest(cfg, 0));

  Json no_version = good;
  no_version.erase("schema_version");
  CHECK_THROWS_AS(report::validate_report(no_version), report::SchemaError);

  Json wrong_version = good;
  wrong_version["schema_version"] = 2;
  CHECK_THROWS_AS(report::validate_report(wrong_version), report::SchemaError);

  Json bad_kind = good;
  bad_kind["kind"] = "audit";
  CHECK_THROWS_AS(report::validate_report(bad_kind), report::SchemaError);

  Json bad_config = good;
  bad_config["config"]["surprise"] = true;
  CHECK_THROWS_AS(report::validate_report(bad_config), report::SchemaError);

  Json bad_fraction = good;
  bad_fraction["verdict"]["f_direct"] = 1.5;
  CHECK_THROWS_AS(report::validate_report(bad_fraction), report::SchemaError);

  Json bad_timing = good;
  bad_timing["timing"] = {{"wall_ms", -3.0}};
  CHECK_THROWS_AS(report::validate_report(bad_timing), report::SchemaError);

  Json good_timing = good;
  good_timing["timing"] = {{"wall_ms", 12.5}};
  CHECK_NOTHROW(report::validate_report(good_timing));

  protocol::ProtocolConfig acfg;
  acfg.total_pairs = 60;
  acfg.alice_check_pairs = 10;
  acfg.bob_check_pairs = 10;
  const auto bias = adversary::estimate_bias(acfg, adversary::AliceStrategy::Honest,
                                             adversary::BobStrategy::HonestGuess,
                                             adversary::SuppressionMode::Both, 120, 7, 1);
  Json attack = report::attack_report(acfg, bias);
  attack["attack"]["alice"] = "mitm";
  CHECK_THROWS_AS(report::validate_report(attack), report::SchemaError);
}

TEST_CASE("transcript text export matches the embedded report lines") {
  protocol::ProtocolConfig cfg;
  cfg.seed = 4242;
  const protocol::RunResult res = protocol::run_honest(cfg, 0);
  const std::string text = report::transcript_text(res.transcript);
  CHECK(text.ends_with('\n'));
  const Json j = report::run_report(cfg, res);
  std::string joined;
  for (const auto& line : j.at("transcript")) {
    joined += line.get<std::string>();
    joined += '\n';
  }
  CHECK(joined == text);
  for (const auto& entry : res.transcript) {
    CHECK(entry.digest.size() == 16);
  }
}

TEST_CASE("render emits two-space indented json plus newline") {
  const Json j = Json::parse(R"({"a": 1})");
  CHECK(report::render(j) == "{\n  \"a\": 1\n}\n");
  protocol::ProtocolConfig cfg;
  const Json full = report::run_report(cfg, protocol::run_honest(cfg, 0));
  const Json reparsed = Json::parse(report::render(full));
  CHECK(reparsed == full);
}
