#include "chunkseam.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/error.hpp"
#include "core/metrics.hpp"
#include "core/types.hpp"
#include "core/version.hpp"
#include "io/trace_io.hpp"
#include "run/commands.hpp"
#include "stats/stats.hpp"

using namespace chunkseam;

struct chunkseam_trace {
  RolloutTrace trace;
};

namespace {

thread_local std::string g_last_error;

chunkseam_status status_from_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
      return CHUNKSEAM_ERROR_INVALID_ARGUMENT;
    case ErrorCode::config:
      return CHUNKSEAM_ERROR_CONFIG;
    case ErrorCode::capability:
      return CHUNKSEAM_ERROR_CAPABILITY;
    case ErrorCode::io:
      return CHUNKSEAM_ERROR_IO;
    case ErrorCode::runner:
      return CHUNKSEAM_ERROR_RUNNER;
    case ErrorCode::internal:
      return CHUNKSEAM_ERROR_INTERNAL;
  }
  return CHUNKSEAM_ERROR_INTERNAL;
}

template <typename Fn>
chunkseam_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return CHUNKSEAM_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_from_code(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CHUNKSEAM_ERROR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CHUNKSEAM_ERROR_INTERNAL;
  }
}

char* copy_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (!out) {
    throw std::bad_alloc();
  }
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

void require_arg(bool ok, const char* what) {
  if (!ok) {
    throw_error(ErrorCode::invalid_argument, what);
  }
}

}  // namespace

extern "C" {

const char* chunkseam_version(void) { return kVersion; }

const char* chunkseam_status_name(chunkseam_status status) {
  switch (status) {
    case CHUNKSEAM_OK:
      return "ok";
    case CHUNKSEAM_ERROR_INVALID_ARGUMENT:
      return "invalid_argument";
    case CHUNKSEAM_ERROR_CONFIG:
      return "config_error";
    case CHUNKSEAM_ERROR_CAPABILITY:
      return "capability_error";
    case CHUNKSEAM_ERROR_IO:
      return "io_error";
    case CHUNKSEAM_ERROR_RUNNER:
      return "runner_error";
    case CHUNKSEAM_ERROR_INTERNAL:
      return "internal_error";
  }
  return "unknown";
}

const char* chunkseam_last_error(void) { return g_last_error.c_str(); }

void chunkseam_string_free(char* text) { std::free(text); }

chunkseam_status chunkseam_run(const char* command, const char* config_json,
                               const char* const* input_paths, size_t n_inputs,
                               char** result_json) {
  return guarded([&]() {
    require_arg(command != nullptr, "command must not be NULL");
    nlohmann::json config = nlohmann::json::object();
    if (config_json != nullptr && config_json[0] != '\0') {
      config = nlohmann::json::parse(config_json, nullptr, false);
      if (config.is_discarded()) {
        throw_error(ErrorCode::config, "config_json is not valid JSON");
      }
    }
    std::vector<std::string> inputs;
    for (size_t i = 0; i < n_inputs; ++i) {
      require_arg(input_paths != nullptr && input_paths[i] != nullptr,
                  "input_paths entry must not be NULL");
      inputs.emplace_back(input_paths[i]);
    }
    auto outcome = run::run_command(command, config, inputs);
    if (result_json != nullptr) {
      nlohmann::json envelope;
      envelope["status"] = "ok";
      envelope["written_files"] = outcome.written_files;
      envelope["warnings"] = outcome.warnings;
      envelope["result"] = std::move(outcome.result);
      *result_json = copy_string(envelope.dump(2) + "\n");
    }
  });
}

chunkseam_status chunkseam_trace_read(const char* path, chunkseam_trace** out_trace) {
  return guarded([&]() {
    require_arg(path != nullptr, "path must not be NULL");
    require_arg(out_trace != nullptr, "out_trace must not be NULL");
    auto* handle = new chunkseam_trace{io::read_trace(path)};
    *out_trace = handle;
  });
}

chunkseam_status chunkseam_trace_write(const chunkseam_trace* trace, const char* path) {
  return guarded([&]() {
    require_arg(trace != nullptr, "trace must not be NULL");
    require_arg(path != nullptr, "path must not be NULL");
    io::write_trace(trace->trace, path);
  });
}

void chunkseam_trace_free(chunkseam_trace* trace) { delete trace; }

chunkseam_status chunkseam_trace_info(const chunkseam_trace* trace, int64_t* steps,
                                      int64_t* stride, int64_t* horizon,
                                      int64_t* action_dim, int* success) {
  return guarded([&]() {
    require_arg(trace != nullptr, "trace must not be NULL");
    if (steps) *steps = trace->trace.steps();
    if (stride) *stride = trace->trace.stride_k;
    if (horizon) *horizon = trace->trace.horizon_h;
    if (action_dim) *action_dim = trace->trace.dim();
    if (success) *success = trace->trace.success ? 1 : 0;
  });
}

chunkseam_status chunkseam_trace_episode_contrast(const chunkseam_trace* trace,
                                                  const char* control, int64_t first_n,
                                                  int64_t guard_margin,
                                                  double* out_contrast,
                                                  double* out_boundary_jerk) {
  return guarded([&]() {
    require_arg(trace != nullptr, "trace must not be NULL");
    require_arg(control != nullptr, "control must not be NULL");
    metrics::ControlOptions options;
    options.window = metrics::control_window_from_name(control);
    options.first_n = first_n;
    options.guard_margin = guard_margin;
    auto summary = metrics::episode_contrast(trace->trace, options);
    if (out_contrast) *out_contrast = summary.jerk_contrast;
    if (out_boundary_jerk) *out_boundary_jerk = summary.boundary_transition_jerk;
  });
}

chunkseam_status chunkseam_jerk_series(const double* actions, int64_t steps, int64_t dim,
                                       int64_t window_start, int64_t window_end,
                                       double* out_values, int64_t* out_count) {
  return guarded([&]() {
    require_arg(actions != nullptr, "actions must not be NULL");
    require_arg(out_values != nullptr, "out_values must not be NULL");
    require_arg(steps >= 1 && dim >= 1, "steps and dim must be >= 1");
    RolloutTrace trace;
    trace.executed.resize(steps, dim);
    for (int64_t t = 0; t < steps; ++t) {
      for (int64_t d = 0; d < dim; ++d) {
        trace.executed(t, d) = actions[t * dim + d];
      }
    }
    trace.stride_k = 1;
    trace.horizon_h = 1;
    auto series = metrics::jerk_series(trace, Window{window_start, window_end});
    for (std::size_t i = 0; i < series.size(); ++i) {
      out_values[i] = series[i].second;
    }
    if (out_count) *out_count = static_cast<int64_t>(series.size());
  });
}

chunkseam_status chunkseam_wilson_ci(int64_t successes, int64_t n, double level,
                                     double* out_point, double* out_lo, double* out_hi) {
  return guarded([&]() {
    auto est = stats::wilson_ci(successes, n, level);
    if (out_point) *out_point = est.point;
    if (out_lo) *out_lo = est.lo;
    if (out_hi) *out_hi = est.hi;
  });
}

chunkseam_status chunkseam_bootstrap_ci(const double* samples, int64_t n, int64_t n_boot,
                                        double level, uint64_t seed, double* out_point,
                                        double* out_lo, double* out_hi) {
  return guarded([&]() {
    require_arg(samples != nullptr, "samples must not be NULL");
    require_arg(n >= 1, "n must be >= 1");
    std::vector<double> xs(samples, samples + n);
    auto est = stats::bootstrap_ci(xs, n_boot, level, seed);
    if (out_point) *out_point = est.point;
    if (out_lo) *out_lo = est.lo;
    if (out_hi) *out_hi = est.hi;
  });
}

chunkseam_status chunkseam_permutation_test(const double* group_a, int64_t n_a,
                                            const double* group_b, int64_t n_b,
                                            int64_t n_perm, int two_sided, uint64_t seed,
                                            double* out_observed_delta,
                                            double* out_p_value) {
  return guarded([&]() {
    require_arg(group_a != nullptr && group_b != nullptr, "groups must not be NULL");
    require_arg(n_a >= 1 && n_b >= 1, "groups must be nonempty");
    std::vector<double> a(group_a, group_a + n_a);
    std::vector<double> b(group_b, group_b + n_b);
    auto result = stats::permutation_test(
        a, b, n_perm,
        two_sided ? stats::Sidedness::two_sided : stats::Sidedness::greater, seed);
    if (out_observed_delta) *out_observed_delta = result.observed_delta;
    if (out_p_value) *out_p_value = result.p_value;
  });
}

chunkseam_status chunkseam_pearson_r(const double* xs, const double* ys, int64_t n,
                                     double* out_r) {
  return guarded([&]() {
    require_arg(xs != nullptr && ys != nullptr, "inputs must not be NULL");
    require_arg(n >= 3, "n must be >= 3");
    std::vector<double> x(xs, xs + n);
    std::vector<double> y(ys, ys + n);
    double r = stats::pearson_r(x, y);
    if (out_r) *out_r = r;
  });
}

}  // extern "C"
