#pragma once

#include <string>

#include <json.hpp>

#include "fidmet/channels.hpp"
#include "fidmet/harness.hpp"

namespace fidmet {

using nlohmann::json;

// State format: {"dim": d, "matrix": [[[re, im], ...], ...]} row-major.
json state_to_json(const DensityMatrix& rho);
DensityMatrix state_from_json(const json& j); // validates, reporting deviations

// Pure-state format: {"dim": d, "amplitudes": [[re, im], ...]}.
json pure_to_json(const PureState& psi);
PureState pure_from_json(const json& j);

// Channel format: {"dim_in": d, "dim_out": d, "kraus": [matrix, ...]} with
// the matrix encoding shared with the state format.
json channel_to_json(const KrausChannel& phi);
KrausChannel channel_from_json(const json& j);

json spec_to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const json& j);

json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const json& j);

// File helpers; throw ValidationError on malformed JSON or failed reads.
json load_json_file(const std::string& path);
void save_json_file(const json& j, const std::string& path);
DensityMatrix load_state(const std::string& path);

} // namespace fidmet
