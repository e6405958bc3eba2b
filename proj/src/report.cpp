#include "qct/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace qct::report {

namespace {

using nlohmann::json;

Json axis_policy_json(const protocol::AxisPolicy& policy) {
  if (policy.kind == protocol::AxisPolicyKind::RandomXZ) return "random-xz";
  Json fixed = Json::object();
  fixed["fixed"] = Json::array({policy.fixed_axis.x, policy.fixed_axis.y, policy.fixed_axis.z});
  return fixed;
}

const char* verdict_mode_name(protocol::VerdictMode m) {
  return m == protocol::VerdictMode::DualOrder ? "dual" : "claimed";
}

Json interval_json(const adversary::Interval& iv) {
  Json j = Json::object();
  j["center"] = iv.center;
  j["half_width"] = iv.half_width;
  return j;
}

Json check_json(const protocol::CheckResult& c) {
  Json j = Json::object();
  j["passed"] = c.passed;
  j["checked"] = c.checked;
  j["failures"] = c.failures;
  j["allowed"] = c.allowed;
  return j;
}

Json envelope(const char* kind, const protocol::ProtocolConfig& cfg) {
  Json j = Json::object();
  j["schema_version"] = kSchemaVersion;
  j["kind"] = kind;
  j["tool"] = Json::object();
  j["tool"]["name"] = kToolName;
  j["tool"]["version"] = kToolVersion;
  j["seed"] = cfg.seed;
  j["config"] = config_json(cfg);
  return j;
}

// --- strict config parsing helpers --------------------------------------

[[noreturn]] void bad(const std::string& msg) { throw protocol::ConfigError("config: " + msg); }

void require_known_keys(const json& obj, std::initializer_list<const char*> known,
                        const char* where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) bad(std::string("unknown key '") + key + "' in " + where);
  }
}

int get_int(const json& obj, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) bad(std::string("'") + key + "' must be an integer");
  return v.get<int>();
}

double get_prob(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) bad(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

Json config_json(const protocol::ProtocolConfig& cfg) {
  Json j = Json::object();
  j["N"] = cfg.total_pairs;
  j["n_a"] = cfg.alice_check_pairs;
  j["n_b"] = cfg.bob_check_pairs;
  j["axis_policy"] = axis_policy_json(cfg.axis_policy);
  j["verdict_mode"] = verdict_mode_name(cfg.verdict_mode);
  if (cfg.thresholds) {
    j["theta_hi"] = cfg.thresholds->hi;
    j["theta_lo"] = cfg.thresholds->lo;
  } else {
    j["theta_hi"] = nullptr;
    j["theta_lo"] = nullptr;
  }
  Json n = Json::object();
  n["env_a"] = cfg.noise.env_a;
  n["env_b"] = cfg.noise.env_b;
  n["self_a"] = cfg.noise.self_a;
  n["self_b"] = cfg.noise.self_b;
  n["detector_advantage"] = cfg.noise.detector_advantage;
  j["noise"] = n;
  j["seed"] = cfg.seed;
  return j;
}

protocol::ProtocolConfig config_from_json(const json& j) {
  if (!j.is_object()) bad("document must be an object");
  require_known_keys(j,
                     {"N", "n_a", "n_b", "axis_policy", "verdict_mode", "theta_hi", "theta_lo",
                      "noise", "seed"},
                     "config");
  protocol::ProtocolConfig cfg;
  cfg.total_pairs = get_int(j, "N", cfg.total_pairs);
  cfg.alice_check_pairs = get_int(j, "n_a", cfg.alice_check_pairs);
  cfg.bob_check_pairs = get_int(j, "n_b", cfg.bob_check_pairs);

  if (j.contains("axis_policy")) {
    const json& ap = j.at("axis_policy");
    if (ap.is_string()) {
      if (ap.get<std::string>() != "random-xz") {
        bad("'axis_policy' must be \"random-xz\" or {\"fixed\": [x, y, z]}");
      }
      cfg.axis_policy = protocol::AxisPolicy::random_xz();
    } else if (ap.is_object()) {
      require_known_keys(ap, {"fixed"}, "axis_policy");
      if (!ap.contains("fixed") || !ap.at("fixed").is_array() || ap.at("fixed").size() != 3 ||
          !ap.at("fixed")[0].is_number() || !ap.at("fixed")[1].is_number() ||
          !ap.at("fixed")[2].is_number()) {
        bad("'axis_policy.fixed' must be an array of three numbers");
      }
      qsim::Axis axis{ap.at("fixed")[0].get<double>(), ap.at("fixed")[1].get<double>(),
                      ap.at("fixed")[2].get<double>()};
      cfg.axis_policy = protocol::AxisPolicy::fixed(axis);
    } else {
      bad("'axis_policy' must be \"random-xz\" or {\"fixed\": [x, y, z]}");
    }
  }

  if (j.contains("verdict_mode")) {
    const json& vm = j.at("verdict_mode");
    if (!vm.is_string()) bad("'verdict_mode' must be \"dual\" or \"claimed\"");
    const std::string s = vm.get<std::string>();
    if (s == "dual") {
      cfg.verdict_mode = protocol::VerdictMode::DualOrder;
    } else if (s == "claimed") {
      cfg.verdict_mode = protocol::VerdictMode::ClaimedOrder;
    } else {
      bad("'verdict_mode' must be \"dual\" or \"claimed\"");
    }
  }

  const bool has_hi = j.contains("theta_hi") && !j.at("theta_hi").is_null();
  const bool has_lo = j.contains("theta_lo") && !j.at("theta_lo").is_null();
  if (has_hi != has_lo) bad("'theta_hi' and 'theta_lo' must be set together");
  if (has_hi) {
    if (!j.at("theta_hi").is_number() || !j.at("theta_lo").is_number()) {
      bad("'theta_hi'/'theta_lo' must be numbers");
    }
    cfg.thresholds =
        protocol::Thresholds{j.at("theta_hi").get<double>(), j.at("theta_lo").get<double>()};
  }

  if (j.contains("noise")) {
    const json& nj = j.at("noise");
    if (!nj.is_object()) bad("'noise' must be an object");
    require_known_keys(nj, {"env_a", "env_b", "self_a", "self_b", "detector_advantage"}, "noise");
    cfg.noise.env_a = get_prob(nj, "env_a", 0.0);
    cfg.noise.env_b = get_prob(nj, "env_b", 0.0);
    cfg.noise.self_a = get_prob(nj, "self_a", 0.0);
    cfg.noise.self_b = get_prob(nj, "self_b", 0.0);
    cfg.noise.detector_advantage = get_prob(nj, "detector_advantage", 0.0);
  }

  if (j.contains("seed")) {
    const json& sv = j.at("seed");
    if (!sv.is_number_unsigned() && !(sv.is_number_integer() && sv.get<std::int64_t>() >= 0)) {
      bad("'seed' must be a nonnegative integer");
    }
    cfg.seed = sv.get<std::uint64_t>();
  }

  cfg.validate();
  return cfg;
}

protocol::ProtocolConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    bad("parse error in '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

Json run_report(const protocol::ProtocolConfig& cfg, const protocol::RunResult& result) {
  Json j = envelope("run", cfg);
  Json checks = Json::object();
  checks["source"] = check_json(result.source);
  checks["entanglement"] = check_json(result.entanglement);
  j["checks"] = checks;
  Json commitment = Json::object();
  commitment["bit"] = result.committed_bit;
  commitment["size"] = result.committed_size;
  j["commitment"] = commitment;
  const protocol::Thresholds thr = cfg.effective_thresholds();
  Json v = Json::object();
  v["outcome"] = protocol::to_string(result.verdict.outcome);
  v["abort_reason"] = protocol::to_string(result.verdict.reason);
  v["f_direct"] = result.verdict.f_direct;
  v["f_reverse"] = result.verdict.f_reverse;
  v["singlet_count"] = result.verdict.singlet_count;
  v["theta_hi"] = thr.hi;
  v["theta_lo"] = thr.lo;
  j["verdict"] = v;
  j["coin"] = nullptr;
  Json lines = Json::array();
  for (const auto& entry : result.transcript) {
    lines.push_back(entry.phase + "\t" + entry.sender + "\t" + entry.digest);
  }
  j["transcript"] = lines;
  return j;
}

Json attack_report(const protocol::ProtocolConfig& cfg, const adversary::BiasReport& bias) {
  Json j = envelope("attack", cfg);
  Json a = Json::object();
  a["alice"] = adversary::to_string(bias.alice);
  a["bob"] = adversary::to_string(bias.bob);
  a["suppression"] = adversary::to_string(bias.suppression);
  a["runs"] = bias.runs;
  j["attack"] = a;
  Json b = Json::object();
  b["outcome_one"] = bias.outcome_one;
  b["outcome_zero"] = bias.outcome_zero;
  b["aborts"] = bias.aborts;
  b["abort_rate"] = bias.abort_rate;
  b["p_alice_all"] = bias.p_alice_all;
  b["epsilon_alice_all"] = interval_json(bias.eps_alice_all);
  b["p_bob_all"] = bias.p_bob_all;
  b["epsilon_bob_all"] = interval_json(bias.eps_bob_all);
  b["completed"] = bias.completed;
  b["p_alice_completed"] = bias.p_alice_completed;
  b["epsilon_alice_completed"] = interval_json(bias.eps_alice_completed);
  b["p_bob_completed"] = bias.p_bob_completed;
  b["epsilon_bob_completed"] = interval_json(bias.eps_bob_completed);
  j["bias"] = b;
  Json d = Json::object();
  d["guess_correct"] = bias.guess_correct;
  d["guess_accuracy"] = bias.guess_accuracy;
  d["flip_attempts"] = bias.flip_attempts;
  d["flip_successes"] = bias.flip_successes;
  d["verdict_runs"] = bias.verdict_runs;
  d["mean_f_direct"] = bias.mean_f_direct;
  d["mean_f_reverse"] = bias.mean_f_reverse;
  d["mean_singlets"] = bias.mean_singlets;
  d["em_pairs"] = bias.em_pairs;
  d["em_committed_mismatches"] = bias.em_committed_mismatches;
  d["em_anticorrelation"] = bias.em_anticorrelation;
  j["diagnostics"] = d;
  return j;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "value,success_rate,abort_rate,f_direct_mean,f_reverse_mean,singlet_mean\n";
  const auto put = [&out](double v, char sep) {
    // Shortest round-trip decimal keeps the table byte-stable across runs.
    std::string s;
    if (v == std::floor(v) && std::abs(v) < 1e15) {
      s = std::to_string(static_cast<long long>(v));
    } else {
      for (int prec = 1; prec <= 17; ++prec) {
        std::ostringstream cell;
        cell.precision(prec);
        cell << v;
        s = cell.str();
        double back = 0.0;
        std::istringstream(s) >> back;
        if (back == v) break;
      }
    }
    out << s << sep;
  };
  for (const SweepRow& r : rows) {
    put(r.value, ',');
    put(r.success_rate, ',');
    put(r.abort_rate, ',');
    put(r.f_direct_mean, ',');
    put(r.f_reverse_mean, ',');
    put(r.singlet_mean, '\n');
  }
  return out.str();
}

Json sweep_report(const protocol::ProtocolConfig& cfg, const std::string& param, int runs,
                  const std::vector<SweepRow>& rows) {
  Json j = envelope("sweep", cfg);
  Json s = Json::object();
  s["param"] = param;
  s["runs"] = runs;
  Json arr = Json::array();
  for (const SweepRow& r : rows) {
    Json row = Json::object();
    row["value"] = r.value;
    row["success_rate"] = r.success_rate;
    row["abort_rate"] = r.abort_rate;
    row["f_direct_mean"] = r.f_direct_mean;
    row["f_reverse_mean"] = r.f_reverse_mean;
    row["singlet_mean"] = r.singlet_mean;
    arr.push_back(row);
  }
  s["rows"] = arr;
  j["sweep"] = s;
  return j;
}

// --- schema validation ----------------------------------------------------

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw SchemaError("report: " + msg); }

const json& field(const json& obj, const char* key, const char* where) {
  if (!obj.is_object()) invalid(std::string(where) + " must be an object");
  if (!obj.contains(key)) invalid(std::string("missing '") + key + "' in " + where);
  return obj.at(key);
}

void check_count(const json& obj, const char* key, const char* where) {
  const json& v = field(obj, key, where);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    invalid(std::string("'") + key + "' in " + where + " must be a nonnegative integer");
  }
}

void check_number(const json& obj, const char* key, const char* where) {
  const json& v = field(obj, key, where);
  if (!v.is_number()) invalid(std::string("'") + key + "' in " + where + " must be a number");
}

void check_fraction(const json& obj, const char* key, const char* where) {
  check_number(obj, key, where);
  const double v = obj.at(key).get<double>();
  if (!(v >= 0.0 && v <= 1.0)) {
    invalid(std::string("'") + key + "' in " + where + " must lie in [0, 1]");
  }
}

void check_interval(const json& obj, const char* key, const char* where) {
  const json& v = field(obj, key, where);
  if (!v.is_object()) invalid(std::string("'") + key + "' must be an interval object");
  check_number(v, "center", key);
  check_number(v, "half_width", key);
  if (v.at("half_width").get<double>() < 0.0) {
    invalid(std::string("'") + key + ".half_width' must be nonnegative");
  }
}

void check_enum(const json& obj, const char* key, const char* where,
                std::initializer_list<const char*> allowed) {
  const json& v = field(obj, key, where);
  if (v.is_string()) {
    for (const char* a : allowed) {
      if (v.get<std::string>() == a) return;
    }
  }
  std::string msg = std::string("'") + key + "' in " + where + " must be one of {";
  bool first = true;
  for (const char* a : allowed) {
    if (!first) msg += ", ";
    msg += a;
    first = false;
  }
  invalid(msg + "}");
}

void validate_run_body(const json& j) {
  const json& checks = field(j, "checks", "run report");
  for (const char* which : {"source", "entanglement"}) {
    const json& c = field(checks, which, "checks");
    const json& passed = field(c, "passed", which);
    if (!passed.is_boolean()) invalid(std::string("'passed' in ") + which + " must be boolean");
    check_count(c, "checked", which);
    check_count(c, "failures", which);
    check_count(c, "allowed", which);
  }
  const json& commitment = field(j, "commitment", "run report");
  check_count(commitment, "bit", "commitment");
  if (commitment.at("bit").get<int>() > 1) invalid("'bit' in commitment must be 0 or 1");
  check_count(commitment, "size", "commitment");
  const json& v = field(j, "verdict", "run report");
  check_enum(v, "outcome", "verdict", {"bit0", "bit1", "abort"});
  check_enum(v, "abort_reason", "verdict",
             {"none", "source_rejected", "entanglement_rejected", "empty_singlet_set",
              "threshold_fail", "ambiguous"});
  check_fraction(v, "f_direct", "verdict");
  check_fraction(v, "f_reverse", "verdict");
  check_count(v, "singlet_count", "verdict");
  check_fraction(v, "theta_hi", "verdict");
  check_fraction(v, "theta_lo", "verdict");
  const json& coin = field(j, "coin", "run report");
  if (!coin.is_null()) {
    check_enum(coin, "result", "coin", {"one", "zero", "abort"});
    check_count(coin, "committed_bit", "coin");
    check_count(coin, "guess", "coin");
  }
  const json& transcript = field(j, "transcript", "run report");
  if (!transcript.is_array()) invalid("'transcript' must be an array");
  for (const json& line : transcript) {
    if (!line.is_string()) invalid("'transcript' entries must be strings");
  }
}

void validate_attack_body(const json& j) {
  const json& a = field(j, "attack", "attack report");
  const json& alice = field(a, "alice", "attack");
  if (!alice.is_string() || !adversary::parse_alice_strategy(alice.get<std::string>())) {
    invalid("'alice' is not a known strategy");
  }
  const json& bob = field(a, "bob", "attack");
  if (!bob.is_string() || !adversary::parse_bob_strategy(bob.get<std::string>())) {
    invalid("'bob' is not a known strategy");
  }
  const json& sup = field(a, "suppression", "attack");
  if (!sup.is_string() || !adversary::parse_suppression(sup.get<std::string>())) {
    invalid("'suppression' is not a known mode");
  }
  check_count(a, "runs", "attack");
  const json& b = field(j, "bias", "attack report");
  check_count(b, "outcome_one", "bias");
  check_count(b, "outcome_zero", "bias");
  check_count(b, "aborts", "bias");
  check_fraction(b, "abort_rate", "bias");
  check_fraction(b, "p_alice_all", "bias");
  check_fraction(b, "p_bob_all", "bias");
  check_interval(b, "epsilon_alice_all", "bias");
  check_interval(b, "epsilon_bob_all", "bias");
  check_count(b, "completed", "bias");
  check_fraction(b, "p_alice_completed", "bias");
  check_fraction(b, "p_bob_completed", "bias");
  check_interval(b, "epsilon_alice_completed", "bias");
  check_interval(b, "epsilon_bob_completed", "bias");
  const json& d = field(j, "diagnostics", "attack report");
  check_count(d, "guess_correct", "diagnostics");
  check_fraction(d, "guess_accuracy", "diagnostics");
  check_count(d, "flip_attempts", "diagnostics");
  check_count(d, "flip_successes", "diagnostics");
  check_count(d, "verdict_runs", "diagnostics");
  check_fraction(d, "mean_f_direct", "diagnostics");
  check_fraction(d, "mean_f_reverse", "diagnostics");
  check_number(d, "mean_singlets", "diagnostics");
  check_count(d, "em_pairs", "diagnostics");
  check_count(d, "em_committed_mismatches", "diagnostics");
  check_fraction(d, "em_anticorrelation", "diagnostics");
}

void validate_sweep_body(const json& j) {
  const json& s = field(j, "sweep", "sweep report");
  check_enum(s, "param", "sweep", {"noise", "n", "theta-hi", "detector-advantage"});
  check_count(s, "runs", "sweep");
  const json& rows = field(s, "rows", "sweep");
  if (!rows.is_array()) invalid("'rows' must be an array");
  for (const json& row : rows) {
    check_number(row, "value", "sweep row");
    check_fraction(row, "success_rate", "sweep row");
    check_fraction(row, "abort_rate", "sweep row");
    check_fraction(row, "f_direct_mean", "sweep row");
    check_fraction(row, "f_reverse_mean", "sweep row");
    check_number(row, "singlet_mean", "sweep row");
  }
}

}  // namespace

void validate_report(const json& j) {
  if (!j.is_object()) invalid("document must be an object");
  const json& sv = field(j, "schema_version", "report");
  if (!sv.is_number_integer() || sv.get<int>() != kSchemaVersion) {
    invalid("unsupported schema_version");
  }
  check_enum(j, "kind", "report", {"run", "attack", "sweep"});
  const json& tool = field(j, "tool", "report");
  if (!field(tool, "name", "tool").is_string() || !field(tool, "version", "tool").is_string()) {
    invalid("'tool' must carry string name and version");
  }
  const json& seed = field(j, "seed", "report");
  const bool seed_ok =
      seed.is_number_unsigned() || (seed.is_number_integer() && seed.get<std::int64_t>() >= 0);
  if (!seed_ok) invalid("'seed' must be a nonnegative integer");
  try {
    (void)config_from_json(j.at("config"));
  } catch (const protocol::ConfigError& e) {
    invalid(std::string("embedded config invalid: ") + e.what());
  }
  if (j.contains("timing")) {
    const json& t = j.at("timing");
    if (!t.is_object() || !t.contains("wall_ms") || !t.at("wall_ms").is_number() ||
        t.at("wall_ms").get<double>() < 0.0) {
      invalid("'timing' must be {wall_ms: nonnegative number}");
    }
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "run") {
    validate_run_body(j);
  } else if (kind == "attack") {
    validate_attack_body(j);
  } else {
    validate_sweep_body(j);
  }
}

std::string render(const Json& j) { return j.dump(2) + "\n"; }

std::string transcript_text(const std::vector<protocol::TranscriptEntry>& transcript) {
  std::string out;
  for (const auto& entry : transcript) {
    out += entry.phase;
    out += '\t';
    out += entry.sender;
    out += '\t';
    out += entry.digest;
    out += '\n';
  }
  return out;
}

}  // namespace qct::report
