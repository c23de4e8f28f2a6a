#include "io/report_io.hpp"

#include <cmath>
#include <sstream>

#include "core/error.hpp"
#include "io/trace_io.hpp"

namespace chunkseam::io {

using nlohmann::json;

namespace {

json number_or_null(double value) {
  if (!std::isfinite(value)) {
    return nullptr;
  }
  return value;
}

}  // namespace

json to_json(const stats::PermutationResult& result) {
  json out;
  out["observed_delta"] = number_or_null(result.observed_delta);
  out["p_value"] = number_or_null(result.p_value);
  out["n_permutations"] = result.n_permutations;
  out["sidedness"] = stats::sidedness_name(result.sidedness);
  out["exhaustive"] = result.exhaustive;
  out["degenerate"] = result.degenerate;
  return out;
}

json to_json(const stats::IntervalEstimate& estimate) {
  json out;
  out["point"] = number_or_null(estimate.point);
  out["lo"] = number_or_null(estimate.lo);
  out["hi"] = number_or_null(estimate.hi);
  out["level"] = estimate.level;
  out["method"] = estimate.method;
  out["degenerate"] = estimate.degenerate;
  return out;
}

json to_json(const experiments::OutcomeAssociationReport& report) {
  json out;
  out["n_episodes"] = report.n_episodes;
  out["n_success"] = report.n_success;
  out["n_failure"] = report.n_failure;
  out["n_invalid"] = report.n_invalid;
  out["underpowered"] = report.underpowered;
  out["sidedness"] = stats::sidedness_name(report.sidedness);
  out["n_perm"] = report.n_perm;
  out["matched_horizon_length"] = report.matched_horizon_length;
  json rows = json::array();
  for (const auto& row : report.rows) {
    json r;
    r["control"] = row.control;
    r["n_success"] = row.n_success;
    r["n_failure"] = row.n_failure;
    r["excluded"] = row.excluded;
    r["success_mean"] = number_or_null(row.success_mean);
    r["failure_mean"] = number_or_null(row.failure_mean);
    r["delta"] = number_or_null(row.delta);
    r["applicable"] = row.applicable;
    r["test"] = row.applicable ? to_json(row.test) : json(nullptr);
    rows.push_back(std::move(r));
  }
  out["controls"] = std::move(rows);
  json course = json::array();
  for (const auto& point : report.matched_horizon) {
    json p;
    p["t"] = point.t;
    p["mean_jerk_success"] = number_or_null(point.mean_jerk_success);
    p["mean_jerk_failure"] = number_or_null(point.mean_jerk_failure);
    p["boundary"] = point.boundary;
    course.push_back(std::move(p));
  }
  out["matched_horizon"] = std::move(course);
  return out;
}

json to_json(const experiments::ScanResult& result) {
  json out;
  out["n_contexts"] = result.n_contexts;
  out["n_samples"] = result.n_samples;
  out["varied"] = result.varied;
  out["varied_note"] =
      "per-sample redraw applies to the '" + result.varied +
      "' chunk noise; the reference value holds both noises at the source "
      "rollout's draws";
  out["mean_btj_std"] = number_or_null(result.mean_btj_std);
  out["mean_contrast_std"] = number_or_null(result.mean_contrast_std);
  out["btj_std_ci"] = to_json(result.btj_std_ci);
  out["contrast_std_ci"] = to_json(result.contrast_std_ci);
  json contexts = json::array();
  for (const auto& scan : result.contexts) {
    json c;
    c["context_id"] = scan.context_id;
    c["n_configured"] = scan.n_configured;
    c["n_invalid"] = scan.n_invalid;
    c["btj_std"] = number_or_null(scan.btj_std);
    c["contrast_std"] = number_or_null(scan.contrast_std);
    c["reference_valid"] = scan.reference_valid;
    c["reference_btj"] = number_or_null(scan.reference_btj);
    c["reference_contrast"] = number_or_null(scan.reference_contrast);
    c["btj_samples"] = scan.btj_samples;
    c["contrast_samples"] = scan.contrast_samples;
    contexts.push_back(std::move(c));
  }
  out["contexts"] = std::move(contexts);
  return out;
}

json to_json(const std::vector<experiments::DecompositionRow>& rows) {
  json out = json::array();
  for (const auto& row : rows) {
    json r;
    r["condition"] = experiments::vary_condition_name(row.condition);
    r["btj_std"] = number_or_null(row.btj_std);
    r["contrast_std"] = number_or_null(row.contrast_std);
    r["n_samples"] = row.n_samples;
    r["n_contexts"] = row.n_contexts;
    r["n_invalid"] = row.n_invalid;
    out.push_back(std::move(r));
  }
  return out;
}

json to_json(const experiments::SweepResult& sweep) {
  json out;
  out["context_id"] = sweep.context_id;
  out["direction_id"] = sweep.direction.direction_id;
  out["candidate_index"] = sweep.direction.candidate_index;
  out["selection_score"] = number_or_null(sweep.direction.selection_score);
  out["degenerate"] = sweep.direction.degenerate;
  out["alpha_grid"] = sweep.alpha_grid;
  json btj = json::array();
  json contrast = json::array();
  for (std::size_t i = 0; i < sweep.btj_values.size(); ++i) {
    btj.push_back(number_or_null(sweep.btj_values[i]));
    contrast.push_back(number_or_null(sweep.contrast_values[i]));
  }
  out["btj"] = std::move(btj);
  out["contrast"] = std::move(contrast);
  out["pearson_btj"] = number_or_null(sweep.pearson_btj);
  out["pearson_contrast"] = number_or_null(sweep.pearson_contrast);
  out["btj_range"] = number_or_null(sweep.btj_range);
  out["contrast_range"] = number_or_null(sweep.contrast_range);
  out["n_invalid"] = sweep.n_invalid;
  return out;
}

json to_json(const experiments::DirectionSearchResult& result) {
  json out;
  out["mean_abs_r_btj"] = number_or_null(result.mean_abs_r_btj);
  out["mean_abs_r_contrast"] = number_or_null(result.mean_abs_r_contrast);
  out["mean_btj_range"] = number_or_null(result.mean_btj_range);
  out["mean_contrast_range"] = number_or_null(result.mean_contrast_range);
  json sweeps = json::array();
  for (const auto& sweep : result.sweeps) {
    sweeps.push_back(to_json(sweep));
  }
  out["sweeps"] = std::move(sweeps);
  return out;
}

json to_json(const experiments::GroupReport& report) {
  json out;
  out["arm"] = report.arm;
  out["n"] = report.n;
  out["successes"] = report.successes;
  out["success_rate"] = to_json(report.success_rate);
  out["contrast_mean"] = to_json(report.contrast_mean);
  out["raw_contrasts"] = report.raw_contrasts;
  json raw_success = json::array();
  for (auto s : report.raw_success) {
    raw_success.push_back(s != 0);
  }
  out["raw_success"] = std::move(raw_success);
  out["fallback_episodes"] = report.fallback_episodes;
  out["excluded_episodes"] = report.excluded_episodes;
  return out;
}

json to_json(const experiments::SteeringRunResult& result) {
  json out;
  json groups = json::array();
  for (const auto& group : result.groups) {
    groups.push_back(to_json(group));
  }
  out["groups"] = std::move(groups);
  out["contrast_ordering_good_baseline_bad"] = result.contrast_ordering_holds;
  out["success_ordering_good_baseline_bad"] = result.success_ordering_holds;
  out["regime"] = result.regime;
  return out;
}

json to_json(const experiments::AggregatedReports& pooled) {
  json out;
  json groups = json::array();
  for (const auto& group : pooled.groups) {
    groups.push_back(to_json(group));
  }
  out["groups"] = std::move(groups);
  out["constituent_regimes"] = pooled.constituent_regimes;
  out["regime_note"] = pooled.regime_note;
  out["contrast_ordering_good_baseline_bad"] = pooled.contrast_ordering_holds;
  out["success_ordering_good_baseline_bad"] = pooled.success_ordering_holds;
  return out;
}

experiments::SteeringRunResult steering_run_from_json(const json& value) {
  experiments::SteeringRunResult result;
  auto groups = value.find("groups");
  if (groups == value.end() || !groups->is_array()) {
    throw_error(ErrorCode::io, "steering report: missing groups array");
  }
  try {
    for (const auto& g : *groups) {
      experiments::GroupReport group;
      group.arm = g.at("arm").get<std::string>();
      group.n = g.at("n").get<std::int64_t>();
      group.successes = g.at("successes").get<std::int64_t>();
      group.raw_contrasts = g.at("raw_contrasts").get<std::vector<double>>();
      for (const auto& s : g.at("raw_success")) {
        group.raw_success.push_back(s.get<bool>() ? 1 : 0);
      }
      group.fallback_episodes = g.at("fallback_episodes").get<std::int64_t>();
      group.excluded_episodes = g.at("excluded_episodes").get<std::int64_t>();
      if (group.n != static_cast<std::int64_t>(group.raw_contrasts.size())) {
        throw_error(ErrorCode::io, "steering report: n != raw contrast count for arm '" +
                                       group.arm + "'");
      }
      result.groups.push_back(std::move(group));
    }
    result.regime = value.value("regime", std::string{});
  } catch (const json::exception& e) {
    throw_error(ErrorCode::io, std::string("steering report: ") + e.what());
  }
  return result;
}

std::string association_csv(const experiments::OutcomeAssociationReport& report) {
  std::ostringstream out;
  out << "control,n_success,n_failure,excluded,success_mean,failure_mean,delta,"
         "p_value,sidedness,n_permutations,exhaustive,applicable\n";
  for (const auto& row : report.rows) {
    out << row.control << "," << row.n_success << "," << row.n_failure << ","
        << row.excluded << "," << format_double(row.success_mean) << ","
        << format_double(row.failure_mean) << "," << format_double(row.delta) << ",";
    if (row.applicable) {
      out << format_double(row.test.p_value) << ","
          << stats::sidedness_name(row.test.sidedness) << "," << row.test.n_permutations
          << "," << (row.test.exhaustive ? "true" : "false");
    } else {
      out << "nan," << stats::sidedness_name(report.sidedness) << ",0,false";
    }
    out << "," << (row.applicable ? "true" : "false") << "\n";
  }
  return out.str();
}

std::string timecourse_csv(const experiments::OutcomeAssociationReport& report) {
  std::ostringstream out;
  out << "t,mean_jerk_success,mean_jerk_failure,boundary\n";
  for (const auto& point : report.matched_horizon) {
    out << point.t << "," << format_double(point.mean_jerk_success) << ","
        << format_double(point.mean_jerk_failure) << ","
        << (point.boundary ? "true" : "false") << "\n";
  }
  return out.str();
}

std::string scan_csv(const experiments::ScanResult& result) {
  std::ostringstream out;
  out << "context_id,n_configured,n_invalid,btj_std,contrast_std,reference_btj,"
         "reference_contrast\n";
  for (const auto& scan : result.contexts) {
    out << scan.context_id << "," << scan.n_configured << "," << scan.n_invalid << ","
        << format_double(scan.btj_std) << "," << format_double(scan.contrast_std) << ","
        << format_double(scan.reference_btj) << ","
        << format_double(scan.reference_contrast) << "\n";
  }
  return out.str();
}

std::string decomposition_csv(const std::vector<experiments::DecompositionRow>& rows) {
  std::ostringstream out;
  out << "condition,btj_std,contrast_std,n_samples,n_contexts,n_invalid\n";
  for (const auto& row : rows) {
    out << experiments::vary_condition_name(row.condition) << ","
        << format_double(row.btj_std) << "," << format_double(row.contrast_std) << ","
        << row.n_samples << "," << row.n_contexts << "," << row.n_invalid << "\n";
  }
  return out.str();
}

std::string sweeps_csv(const std::vector<experiments::SweepResult>& sweeps) {
  std::ostringstream out;
  out << "context_id,alpha,btj,contrast,valid\n";
  for (const auto& sweep : sweeps) {
    for (std::size_t i = 0; i < sweep.alpha_grid.size(); ++i) {
      out << sweep.context_id << "," << format_double(sweep.alpha_grid[i]) << ","
          << format_double(sweep.btj_values[i]) << ","
          << format_double(sweep.contrast_values[i]) << ","
          << (sweep.valid[i] ? "true" : "false") << "\n";
    }
  }
  return out.str();
}

std::string groups_csv(const std::vector<experiments::GroupReport>& groups) {
  std::ostringstream out;
  out << "arm,n,success_rate,success_lo,success_hi,contrast,contrast_lo,contrast_hi\n";
  for (const auto& group : groups) {
    out << group.arm << "," << group.n << "," << format_double(group.success_rate.point)
        << "," << format_double(group.success_rate.lo) << ","
        << format_double(group.success_rate.hi) << ","
        << format_double(group.contrast_mean.point) << ","
        << format_double(group.contrast_mean.lo) << ","
        << format_double(group.contrast_mean.hi) << "\n";
  }
  return out.str();
}

}  // namespace chunkseam::io
