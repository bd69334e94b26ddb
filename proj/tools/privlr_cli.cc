// privlr: differentially private multiparty logistic regression experiments.
//
//   privlr sweep-epsilon --data bank-full.csv --schema bank.schema --delimiter ';' --out eps.csv
//   privlr sweep-cardinality --synthetic 4000,10,3 --out card.csv
//   privlr time --config run.cfg
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "privlr/data_pipeline.hpp"
#include "privlr/experiment.hpp"
#include "privlr/random.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct Options {
  std::string data;
  std::string schema;
  std::vector<double> synthetic;  // N, D, SEPARATION
  std::string delimiter = ",";
  bool no_header = false;
  std::vector<std::string> algorithms{"NOISELESS", "OFPA", "OFAA"};
  std::string out;
  std::uint64_t seed = 0;
  int repetitions = 10;
  int epochs = 40;
  double learning_rate = 0.1;
  double eta = 1e-3;
  int max_rounds = 50;
  double epsilon = 0.8;
  double alg1_sensitivity = 4.0;
  std::vector<double> grid;
};

privlr::Datasetd load_dataset(const Options& opt) {
  if (!opt.synthetic.empty()) {
    if (!opt.data.empty()) throw privlr::InvalidArgument("--data and --synthetic are mutually exclusive");
    const double n = opt.synthetic[0], d = opt.synthetic[1];
    if (n != std::floor(n) || d != std::floor(d) || n > 1e9 || d > 1e6)
      throw privlr::InvalidArgument("--synthetic expects integer N and D");
    return privlr::synthesize(static_cast<privlr::Index>(n), static_cast<privlr::Index>(d), opt.synthetic[2],
                              privlr::derive_seed(opt.seed, {0x5e7}));
  }
  if (opt.data.empty() || opt.schema.empty()) throw privlr::InvalidArgument("--data and --schema are required");
  if (opt.delimiter.size() != 1) throw privlr::InvalidArgument("--delimiter must be a single character");
  const privlr::RawTable table = privlr::load_csv(opt.data, opt.delimiter[0], !opt.no_header);
  return privlr::label_encode(table, privlr::load_schema(opt.schema));
}

privlr::ExperimentSpec make_spec(const Options& opt) {
  privlr::ExperimentSpec spec;
  spec.algorithms.clear();
  for (const std::string& a : opt.algorithms) spec.algorithms.push_back(privlr::parse_algorithm(a));
  spec.repetitions = opt.repetitions;
  spec.gd.epochs = opt.epochs;
  spec.gd.learning_rate = opt.learning_rate;
  spec.eta = opt.eta;
  spec.max_rounds = opt.max_rounds;
  spec.epsilon = opt.epsilon;
  spec.alg1_sensitivity = opt.alg1_sensitivity;
  spec.root_seed = opt.seed;
  return spec;
}

void add_common_options(CLI::App& app, Options& opt) {
  app.add_option("--data", opt.data, "CSV dataset");
  app.add_option("--schema", opt.schema, "column schema file");
  app.add_option("--synthetic", opt.synthetic, "use a synthetic dataset N,D,SEPARATION instead of --data")
      ->delimiter(',')
      ->expected(3);
  app.add_option("--delimiter", opt.delimiter, "CSV delimiter")->capture_default_str();
  app.add_flag("--no-header", opt.no_header, "CSV has no header row");
  app.add_option("--algorithms", opt.algorithms, "subset of NOISELESS,OFPA,OFAA,ALG1")->delimiter(',')->capture_default_str();
  app.add_option("--out", opt.out, "report CSV path");
  app.add_option("--seed", opt.seed, "root seed")->capture_default_str();
  app.add_option("--repetitions", opt.repetitions, "runs per sweep point")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--epochs", opt.epochs, "gradient-descent epochs per local round")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--learning-rate", opt.learning_rate, "gradient-descent learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--eta", opt.eta, "convergence threshold on the global parameter change")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--max-rounds", opt.max_rounds, "round cap")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--epsilon", opt.epsilon, "per-round budget for cardinality/dimensionality sweeps")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--alg1-sensitivity", opt.alg1_sensitivity, "sensitivity used by ALG1")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--grid", opt.grid, "comma-separated sweep values")->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private multiparty logistic regression experiments"};
  app.set_config("--config", "", "key = value file mirroring the flags (flags take precedence)");
  app.require_subcommand(1);

  Options opt;
  add_common_options(app, opt);
  CLI::App* eps = app.add_subcommand("sweep-epsilon", "misclassification vs privacy budget")->fallthrough();
  CLI::App* card = app.add_subcommand("sweep-cardinality", "misclassification vs sampling rate")->fallthrough();
  CLI::App* dim = app.add_subcommand("sweep-dimensionality", "misclassification vs number of features")->fallthrough();
  CLI::App* timing = app.add_subcommand("time", "training time vs privacy budget")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (opt.out.empty()) throw privlr::InvalidArgument("--out is required");
    const privlr::Datasetd data = load_dataset(opt);
    privlr::ExperimentSpec spec = make_spec(opt);

    privlr::MetricsReport report;
    if (eps->parsed() || timing->parsed()) {
      spec.grid = opt.grid.empty() ? privlr::default_epsilon_grid() : opt.grid;
      report = timing->parsed() ? privlr::time_training(data, spec) : privlr::sweep_epsilon(data, spec);
    } else if (card->parsed()) {
      spec.grid = opt.grid.empty() ? privlr::default_cardinality_grid() : opt.grid;
      report = privlr::sweep_cardinality(data, spec);
    } else if (dim->parsed()) {
      spec.grid = opt.grid.empty() ? privlr::default_dimensionality_grid(data.dimension()) : opt.grid;
      report = privlr::sweep_dimensionality(data, spec);
    }
    privlr::emit_report(report, opt.out);
    std::cerr << "wrote " << report.rows.size() << " rows to " << opt.out << "\n";
    return kOk;
  } catch (const privlr::InvalidArgument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const privlr::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const privlr::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
}
