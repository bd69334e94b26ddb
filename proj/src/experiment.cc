#include "privlr/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "privlr/federation.hpp"
#include "privlr/random.hpp"

namespace privlr {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Noiseless:
      return "NOISELESS";
    case Algorithm::Ofpa:
      return "OFPA";
    case Algorithm::Ofaa:
      return "OFAA";
    case Algorithm::Alg1:
      return "ALG1";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::Noiseless, Algorithm::Ofpa, Algorithm::Ofaa, Algorithm::Alg1})
    if (name == to_string(a)) return a;
  throw InvalidArgument("unknown algorithm '" + std::string(name) + "' (expected NOISELESS, OFPA, OFAA or ALG1)");
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Epsilon:
      return "epsilon";
    case SweepAxis::Cardinality:
      return "cardinality";
    case SweepAxis::Dimensionality:
      return "dimensionality";
  }
  return "?";
}

SweepAxis parse_sweep_axis(std::string_view name) {
  for (SweepAxis a : {SweepAxis::Epsilon, SweepAxis::Cardinality, SweepAxis::Dimensionality})
    if (name == to_string(a)) return a;
  throw DataError("unknown sweep axis '" + std::string(name) + "'");
}

std::vector<double> default_epsilon_grid() { return {0.1, 0.2, 0.4, 0.8, 1.6, 3.2}; }

std::vector<double> default_cardinality_grid() { return {0.2, 0.4, 0.6, 0.8, 1.0}; }

std::vector<double> default_dimensionality_grid(Index dimension) {
  if (dimension < 1) throw InvalidArgument("default_dimensionality_grid: dimension must be >= 1");
  const double lo = static_cast<double>(std::min<Index>(5, dimension));
  const double hi = static_cast<double>(dimension);
  std::vector<double> grid;
  for (int i = 0; i < 5; ++i) {
    const double k = std::round(lo + (hi - lo) * i / 4.0);
    if (grid.empty() || grid.back() != k) grid.push_back(k);
  }
  return grid;
}

void ExperimentSpec::validate() const {
  if (algorithms.empty()) throw InvalidArgument("ExperimentSpec: no algorithms selected");
  if (grid.empty()) throw InvalidArgument("ExperimentSpec: sweep grid is empty");
  if (repetitions < 1) throw InvalidArgument("ExperimentSpec: repetitions must be >= 1");
  for (double v : grid) {
    switch (axis) {
      case SweepAxis::Epsilon:
        if (!(v > 0.0)) throw InvalidArgument("ExperimentSpec: epsilon grid values must be > 0");
        break;
      case SweepAxis::Cardinality:
        if (!(v > 0.0 && v <= 1.0)) throw InvalidArgument("ExperimentSpec: sampling rates must lie in (0, 1]");
        break;
      case SweepAxis::Dimensionality:
        if (!(v >= 1.0) || v != std::floor(v)) throw InvalidArgument("ExperimentSpec: dimensions must be integers >= 1");
        break;
    }
  }
  if (!(epsilon > 0.0)) throw InvalidArgument("ExperimentSpec: epsilon must be > 0");
  gd.validate();
  split.validate();
}

const MetricsRow* MetricsReport::find(Algorithm a, double sweep_value) const {
  for (const MetricsRow& r : rows)
    if (r.algorithm == a && std::abs(r.sweep_value - sweep_value) < 1e-9) return &r;
  return nullptr;
}

MetricsReport run_sweep(const ExperimentSpec& spec, const TrialFn& trial) {
  spec.validate();
  MetricsReport report;
  for (Algorithm a : spec.algorithms) {
    for (double value : spec.grid) {
      std::vector<TrialOutcome> outcomes;
      outcomes.reserve(static_cast<std::size_t>(spec.repetitions));
      for (int rep = 0; rep < spec.repetitions; ++rep) outcomes.push_back(trial(a, value, rep));

      const double n = static_cast<double>(outcomes.size());
      MetricsRow row{a, spec.axis, value, 0.0, 0.0, 0.0, 0.0};
      for (const TrialOutcome& o : outcomes) {
        row.mean_miscls += o.misclassification;
        row.mean_seconds += o.seconds;
        row.rounds_used += o.rounds_used;
      }
      row.mean_miscls /= n;
      row.mean_seconds /= n;
      row.rounds_used /= n;
      double var = 0.0;
      for (const TrialOutcome& o : outcomes) var += (o.misclassification - row.mean_miscls) * (o.misclassification - row.mean_miscls);
      row.std_miscls = std::sqrt(var / n);
      report.rows.push_back(row);
    }
  }
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const MetricsRow& x, const MetricsRow& y) {
    return std::make_tuple(to_string(x.algorithm), x.sweep_value) < std::make_tuple(to_string(y.algorithm), y.sweep_value);
  });
  return report;
}

namespace {

Mechanism mechanism_for(Algorithm a) {
  switch (a) {
    case Algorithm::Noiseless:
      return Mechanism::Noiseless;
    case Algorithm::Ofpa:
      return Mechanism::Ofpa;
    case Algorithm::Ofaa:
      return Mechanism::Ofaa;
    case Algorithm::Alg1:
      return Mechanism::ParameterPerturbation;
  }
  return Mechanism::Noiseless;
}

}  // namespace

TrialOutcome run_trial(const Datasetd& encoded, const ExperimentSpec& spec, Algorithm algorithm, double sweep_value,
                       int repetition) {
  const std::uint64_t rep_seed = derive_seed(spec.root_seed, {static_cast<std::uint64_t>(repetition)});

  Datasetd data = spec.axis == SweepAxis::Cardinality ? subsample(encoded, sweep_value, derive_seed(rep_seed, {1}))
                                                      : encoded;
  SplitSpec split = spec.split;
  split.shuffle_seed = derive_seed(rep_seed, {2});
  Partition shares = partition(data, split);
  if (shares.test.empty()) throw DataError("run_trial: test set is empty");

  const Normalizer normalizer = Normalizer::fit(concatenate(shares.parties));
  for (Datasetd& p : shares.parties) p = normalizer.apply(std::move(p));
  shares.test = normalizer.apply(std::move(shares.test));
  if (spec.axis == SweepAxis::Dimensionality) {
    const Index k = static_cast<Index>(sweep_value);
    for (Datasetd& p : shares.parties) p = project_dims(p, k);
    shares.test = project_dims(shares.test, k);
  }

  FederationConfig config;
  config.budget = PrivacyBudget(spec.axis == SweepAxis::Epsilon ? sweep_value : spec.epsilon);
  config.eta = spec.eta;
  config.max_rounds = spec.max_rounds;
  config.gd = spec.gd;
  config.ofaa_clip_radius = spec.ofaa_clip_radius;
  config.parameter_sensitivity = spec.alg1_sensitivity;
  config.root_seed = derive_seed(rep_seed, {3});

  std::vector<Party> parties;
  if (algorithm == Algorithm::Noiseless) {
    parties.push_back({0, concatenate(shares.parties), Mechanism::Noiseless});
  } else {
    for (std::size_t i = 0; i < shares.parties.size(); ++i)
      parties.push_back({static_cast<int>(i), std::move(shares.parties[i]), mechanism_for(algorithm)});
  }

  const auto start = std::chrono::steady_clock::now();
  const FederationResult result = run_federation(parties, config);
  const auto stop = std::chrono::steady_clock::now();

  TrialOutcome out;
  out.misclassification = misclassification_rate(result.params, shares.test);
  out.rounds_used = result.rounds_used;
  if (spec.measure_time) out.seconds = std::chrono::duration<double>(stop - start).count();
  return out;
}

namespace {

MetricsReport sweep(const Datasetd& encoded, ExperimentSpec spec, SweepAxis axis) {
  spec.axis = axis;
  if (axis == SweepAxis::Dimensionality) {
    for (double k : spec.grid)
      if (k > static_cast<double>(encoded.dimension()))
        throw InvalidArgument("sweep_dimensionality: dimension " + std::to_string(static_cast<long long>(k)) +
                              " exceeds the dataset's " + std::to_string(encoded.dimension()) + " features");
  }
  return run_sweep(spec, [&](Algorithm a, double value, int rep) { return run_trial(encoded, spec, a, value, rep); });
}

}  // namespace

MetricsReport sweep_epsilon(const Datasetd& encoded, ExperimentSpec spec) {
  return sweep(encoded, std::move(spec), SweepAxis::Epsilon);
}

MetricsReport sweep_cardinality(const Datasetd& encoded, ExperimentSpec spec) {
  return sweep(encoded, std::move(spec), SweepAxis::Cardinality);
}

MetricsReport sweep_dimensionality(const Datasetd& encoded, ExperimentSpec spec) {
  return sweep(encoded, std::move(spec), SweepAxis::Dimensionality);
}

MetricsReport time_training(const Datasetd& encoded, ExperimentSpec spec) {
  spec.measure_time = true;
  return sweep(encoded, std::move(spec), SweepAxis::Epsilon);
}

std::string format_report(const MetricsReport& report) {
  std::vector<MetricsRow> rows = report.rows;
  std::stable_sort(rows.begin(), rows.end(), [](const MetricsRow& x, const MetricsRow& y) {
    return std::make_tuple(to_string(x.algorithm), x.sweep_value) < std::make_tuple(to_string(y.algorithm), y.sweep_value);
  });
  std::string out(kReportHeader);
  out += '\n';
  char buf[512];
  for (const MetricsRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.6f,%.6f,%.6f,%.6f,%.6f\n", std::string(to_string(r.algorithm)).c_str(),
                  std::string(to_string(r.axis)).c_str(), r.sweep_value, r.mean_miscls, r.std_miscls, r.mean_seconds,
                  r.rounds_used);
    out += buf;
  }
  return out;
}

void emit_report(const MetricsReport& report, const std::filesystem::path& out) {
  if (report.rows.empty()) throw InvalidArgument("emit_report: report has no rows");
  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  if (!file) throw DataError("emit_report: cannot write " + out.string());
  const std::string text = format_report(report);
  file.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!file) throw DataError("emit_report: write failed for " + out.string());
}

MetricsReport parse_report(std::string_view text) {
  const RawTable table = parse_csv(text, ',', true);
  std::string header;
  for (std::size_t i = 0; i < table.header.size(); ++i) header += (i ? "," : "") + table.header[i];
  if (header != kReportHeader) throw DataError("parse_report: unexpected header '" + header + "'");

  MetricsReport report;
  for (const auto& cells : table.rows) {
    MetricsRow r;
    r.algorithm = parse_algorithm(cells[0]);
    r.axis = parse_sweep_axis(cells[1]);
    double* fields[] = {&r.sweep_value, &r.mean_miscls, &r.std_miscls, &r.mean_seconds, &r.rounds_used};
    for (std::size_t i = 0; i < 5; ++i) {
      try {
        std::size_t used = 0;
        *fields[i] = std::stod(cells[i + 2], &used);
        if (used != cells[i + 2].size()) throw std::invalid_argument(cells[i + 2]);
      } catch (const std::exception&) {
        throw DataError("parse_report: bad number '" + cells[i + 2] + "'");
      }
    }
    report.rows.push_back(r);
  }
  return report;
}

MetricsReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("read_report: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_report(ss.str());
}

}  // namespace privlr
