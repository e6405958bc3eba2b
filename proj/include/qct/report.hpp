// Structured reports: config (de)serialization, run/attack/sweep payloads,
// schema validation. Key order is fixed so identical (config, seed) inputs
// reproduce byte-identical documents; wall-clock timing lives in a separate
// "timing" object that reproduction checks ignore.
#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "qct/adversary.hpp"
#include "qct/protocol.hpp"

namespace qct::report {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolName = "qct";
inline constexpr const char* kToolVersion = "1.0.0";

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json config_json(const protocol::ProtocolConfig& cfg);
// Strict: unknown keys, wrong types, or invalid values throw ConfigError.
protocol::ProtocolConfig config_from_json(const nlohmann::json& j);
protocol::ProtocolConfig load_config_file(const std::string& path);

Json run_report(const protocol::ProtocolConfig& cfg, const protocol::RunResult& result);
Json attack_report(const protocol::ProtocolConfig& cfg, const adversary::BiasReport& bias);

struct SweepRow {
  double value = 0.0;
  double success_rate = 0.0;
  double abort_rate = 0.0;
  double f_direct_mean = 0.0;
  double f_reverse_mean = 0.0;
  double singlet_mean = 0.0;
};

std::string sweep_csv(const std::vector<SweepRow>& rows);
Json sweep_report(const protocol::ProtocolConfig& cfg, const std::string& param, int runs,
                  const std::vector<SweepRow>& rows);

// Validates the documented report schema; throws SchemaError with the first
// violation.
void validate_report(const nlohmann::json& j);

// Serialized document: 2-space indent plus trailing newline.
std::string render(const Json& j);

// Transcript in the newline-delimited export form: "phase\tsender\tdigest".
std::string transcript_text(const std::vector<protocol::TranscriptEntry>& transcript);

}  // namespace qct::report
