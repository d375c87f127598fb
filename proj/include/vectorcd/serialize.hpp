#pragma once

#include "vectorcd/aggregation.hpp"
#include "vectorcd/discovery.hpp"
#include "vectorcd/experiment.hpp"
#include "vectorcd/synth.hpp"

#include <string>
#include <vector>

namespace vcd {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

std::string record_to_json(const TestRecord& r);
TestRecord record_from_json(const std::string& line);
std::string log_to_jsonl(const std::vector<TestRecord>& log);
std::vector<TestRecord> log_from_jsonl(const std::string& text);

std::string report_to_json(const ConsistencyReport& r);
ConsistencyReport report_from_json(const std::string& text);

std::string map_to_json(const TunableAggregationMap& map);
TunableAggregationMap map_from_json(const std::string& text);

// result.json holds the graph text and the sepsets; the log goes to log.jsonl.
std::string discovery_to_json(const DiscoveryResult& r);
DiscoveryResult discovery_from_json(const std::string& text);
void write_discovery(const std::string& dir, const DiscoveryResult& r);
DiscoveryResult read_discovery(const std::string& dir);

VectorScmSpec scm_spec_from_json(const std::string& text);
std::string scm_spec_to_json(const VectorScmSpec& spec);
SavarSpec savar_spec_from_json(const std::string& text);
ExperimentConfig experiment_config_from_json(const std::string& text);

}  // namespace vcd
