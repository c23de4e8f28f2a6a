#pragma once

#include <json.hpp>
#include <string>

#include "experiments/experiments.hpp"

namespace chunkseam::io {

// Structured (full precision, provenance) JSON views of the experiment
// results. The command layer wraps these with the effective config echo.
nlohmann::json to_json(const stats::PermutationResult& result);
nlohmann::json to_json(const stats::IntervalEstimate& estimate);
nlohmann::json to_json(const experiments::OutcomeAssociationReport& report);
nlohmann::json to_json(const experiments::ScanResult& result);
nlohmann::json to_json(const std::vector<experiments::DecompositionRow>& rows);
nlohmann::json to_json(const experiments::SweepResult& sweep);
nlohmann::json to_json(const experiments::DirectionSearchResult& result);
nlohmann::json to_json(const experiments::GroupReport& report);
nlohmann::json to_json(const experiments::SteeringRunResult& result);
nlohmann::json to_json(const experiments::AggregatedReports& pooled);

// Reverse mapping needed to pool stored steering runs.
experiments::SteeringRunResult steering_run_from_json(const nlohmann::json& value);

// Plot-ready tabular views (CSV with a header row; empty inputs produce the
// header only).
std::string association_csv(const experiments::OutcomeAssociationReport& report);
std::string timecourse_csv(const experiments::OutcomeAssociationReport& report);
std::string scan_csv(const experiments::ScanResult& result);
std::string decomposition_csv(const std::vector<experiments::DecompositionRow>& rows);
std::string sweeps_csv(const std::vector<experiments::SweepResult>& sweeps);
std::string groups_csv(const std::vector<experiments::GroupReport>& groups);

}  // namespace chunkseam::io
