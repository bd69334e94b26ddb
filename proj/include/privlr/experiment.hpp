#ifndef PRIVLR_EXPERIMENT_HPP
#define PRIVLR_EXPERIMENT_HPP

// Sweeps over privacy budget, dataset cardinality and dimensionality, with
// per-point means over repeated federated training runs.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "privlr/core_model.hpp"
#include "privlr/data_pipeline.hpp"

namespace privlr {

enum class Algorithm { Noiseless, Ofpa, Ofaa, Alg1 };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

enum class SweepAxis { Epsilon, Cardinality, Dimensionality };

std::string_view to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view name);

std::vector<double> default_epsilon_grid();
std::vector<double> default_cardinality_grid();
/// Five evenly spaced (rounded) dimensions from min(5, d) to d.
std::vector<double> default_dimensionality_grid(Index dimension);

struct ExperimentSpec {
  std::vector<Algorithm> algorithms{Algorithm::Noiseless, Algorithm::Ofpa, Algorithm::Ofaa};
  SweepAxis axis = SweepAxis::Epsilon;
  std::vector<double> grid = default_epsilon_grid();
  int repetitions = 10;
  double epsilon = 0.8;  // budget for the cardinality and dimensionality sweeps
  GdSettings gd;
  double eta = 1e-3;
  int max_rounds = 50;
  double ofaa_clip_radius = 10.0;
  double alg1_sensitivity = 4.0;
  SplitSpec split;  // shuffle_seed is re-derived for every repetition
  std::uint64_t root_seed = 0;
  bool measure_time = false;

  void validate() const;
};

struct MetricsRow {
  Algorithm algorithm = Algorithm::Noiseless;
  SweepAxis axis = SweepAxis::Epsilon;
  double sweep_value = 0.0;
  double mean_miscls = 0.0;
  double std_miscls = 0.0;
  double mean_seconds = 0.0;
  double rounds_used = 0.0;  // mean over repetitions
};

struct MetricsReport {
  std::vector<MetricsRow> rows;

  const MetricsRow* find(Algorithm a, double sweep_value) const;
};

struct TrialOutcome {
  double misclassification = 0.0;
  double seconds = 0.0;
  int rounds_used = 0;
};

/// One training run for (algorithm, sweep value, repetition index).
using TrialFn = std::function<TrialOutcome(Algorithm, double, int)>;

/// Calls `trial` exactly `repetitions` times per (algorithm, grid value) and
/// aggregates. Rows are sorted by (algorithm name, sweep value). The
/// standard deviation is the population one.
MetricsReport run_sweep(const ExperimentSpec& spec, const TrialFn& trial);

/// The real trial on an encoded (not yet normalized) dataset: optional
/// subsampling, partition into party shares and test set, normalization
/// fitted on the party shares, optional projection, federated training and
/// test misclassification. NOISELESS trains one party holding the union of
/// the shares.
TrialOutcome run_trial(const Datasetd& encoded, const ExperimentSpec& spec, Algorithm algorithm, double sweep_value,
                       int repetition);

MetricsReport sweep_epsilon(const Datasetd& encoded, ExperimentSpec spec);
MetricsReport sweep_cardinality(const Datasetd& encoded, ExperimentSpec spec);
MetricsReport sweep_dimensionality(const Datasetd& encoded, ExperimentSpec spec);
/// Epsilon sweep with wall-clock timing of the training call.
MetricsReport time_training(const Datasetd& encoded, ExperimentSpec spec);

inline constexpr std::string_view kReportHeader =
    "algorithm,sweep_axis,sweep_value,mean_miscls,std_miscls,mean_seconds,rounds_used";

std::string format_report(const MetricsReport& report);
void emit_report(const MetricsReport& report, const std::filesystem::path& out);
MetricsReport parse_report(std::string_view text);
MetricsReport read_report(const std::filesystem::path& path);

}  // namespace privlr

#endif  // PRIVLR_EXPERIMENT_HPP
