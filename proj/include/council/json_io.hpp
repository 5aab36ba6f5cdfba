#pragma once

// Canonical JSON serialization for every domain type. Field order is fixed
// (ordered_json + explicit insertion order), so a serialized value is stable
// across processes and suitable for hashing and byte comparison.

#include <string>

#include <json.hpp>

#include "council/types.hpp"

namespace council {

using ojson = nlohmann::ordered_json;

ojson to_json(const PolicyOption& v);
PolicyOption policy_option_from_json(const ojson& j);

ojson to_json(const Scenario& v);
Scenario scenario_from_json(const ojson& j);

ojson to_json(const ValuePerspective& v);
ValuePerspective perspective_from_json(const ojson& j);

ojson to_json(const AgentRole& v);
AgentRole agent_role_from_json(const ojson& j);

ojson to_json(const ModelBinding& v);
ModelBinding model_binding_from_json(const ojson& j);

ojson to_json(const ModelAssignment& v);
ModelAssignment model_assignment_from_json(const ojson& j);

ojson to_json(const TranscriptEntry& v);
TranscriptEntry transcript_entry_from_json(const ojson& j);

ojson to_json(const DebateTranscript& v);
DebateTranscript transcript_from_json(const ojson& j);

ojson to_json(const Ranking& v);
Ranking ranking_from_json(const ojson& j);

ojson to_json(const EvaluationRecord& v);
EvaluationRecord evaluation_from_json(const ojson& j);

ojson to_json(const CoherenceAssessment& v);
CoherenceAssessment assessment_from_json(const ojson& j);

ojson to_json(const DeliberationRecord& v);
DeliberationRecord record_from_json(const ojson& j);

ojson to_json(const MetricsBundle& v);
MetricsBundle metrics_bundle_from_json(const ojson& j);

ojson to_json(const AnalysisConfig& v);
AnalysisConfig analysis_config_from_json(const ojson& j);

ojson to_json(const StatResult& v);
ojson to_json(const BootstrapCi& v);

// Compact canonical dump used for hashing and byte-identity checks.
std::string canonical_dump(const ojson& j);

// Current time as ISO-8601 UTC ("2026-01-31T12:00:00Z").
std::string utc_timestamp_now();

// Field access with typed errors; `context` names the enclosing object in
// error messages.
const ojson& require_field(const ojson& j, const std::string& key, const std::string& context);

} // namespace council
