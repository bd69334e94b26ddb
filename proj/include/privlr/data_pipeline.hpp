#ifndef PRIVLR_DATA_PIPELINE_HPP
#define PRIVLR_DATA_PIPELINE_HPP

// CSV ingestion, label encoding, normalization to the l1 unit ball,
// partitioning into party shares and a test set, and the subsampling /
// projection used by the experiment sweeps.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "privlr/core_model.hpp"

namespace privlr {

class CsvError : public DataError {
 public:
  enum class Kind { MissingFile, Empty, Ragged, Malformed };

  CsvError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  char delimiter = ',';
};

/// RFC-4180 style parsing: quoted fields may contain the delimiter, newlines
/// and doubled quotes. Without a header, columns are named c0, c1, ...
RawTable parse_csv(std::string_view text, char delimiter, bool has_header);
RawTable load_csv(const std::filesystem::path& path, char delimiter, bool has_header);

enum class ColumnKind { Numeric, Categorical, Target, Ignore };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
};

struct ColumnSchema {
  std::vector<ColumnSpec> columns;
  std::string positive_class;

  const ColumnSpec* find(std::string_view name) const;
};

/// Lines of `column_name = numeric|categorical|ignore|target:<positive>`.
/// Blank lines and lines starting with '#' are skipped.
ColumnSchema parse_schema(std::string_view text);
ColumnSchema load_schema(const std::filesystem::path& path);

/// Features in table column order (target and ignored columns dropped).
/// Categorical values are sorted lexicographically and numbered from 0.
Datasetd label_encode(const RawTable& table, const ColumnSchema& schema);

/// Column-wise min-max statistics fitted on training data. Applying them
/// scales each column to [0, 1] (clipping out-of-range values, constant
/// columns map to 0) and then divides each record by max(1, ||x||_1).
class Normalizer {
 public:
  static Normalizer fit(const Datasetd& train);

  Datasetd apply(Datasetd data) const;

  const Eigen::VectorXd& min() const { return min_; }
  const Eigen::VectorXd& max() const { return max_; }

 private:
  Eigen::VectorXd min_;
  Eigen::VectorXd max_;
};

/// Fit on `data` and apply to it.
Datasetd normalize(const Datasetd& data);

/// Divides every record whose l1 norm exceeds 1 + 1e-12 by that norm.
Datasetd project_to_l1_ball(Datasetd data);

struct SplitSpec {
  std::vector<double> party_fractions{0.4, 0.3, 0.1};
  double test_fraction = 0.2;
  std::uint64_t shuffle_seed = 0;

  void validate() const;
};

struct Partition {
  std::vector<Datasetd> parties;
  Datasetd test;
};

/// Shuffles, then hands out contiguous blocks of floor(fraction * N)
/// records to each party in turn. The test set takes the rest, less the
/// floor((1 - sum of fractions) * N) records left unassigned when the
/// fractions sum to less than one.
Partition partition(const Datasetd& data, const SplitSpec& spec);

/// Uniform subset of floor(rate * N) records, original order preserved.
Datasetd subsample(const Datasetd& data, double rate, std::uint64_t seed);

/// Keeps the first k feature columns and re-applies the l1 projection.
Datasetd project_dims(const Datasetd& data, Index k);

/// Two unit-variance Gaussian clusters centred at +/-(separation / sqrt(d)) s
/// with s = (+1, -1, +1, ...), balanced labels (record i has label 1 iff i
/// is even), then normalized.
Datasetd synthesize(Index n, Index d, double separation, std::uint64_t seed);

Datasetd select_rows(const Datasetd& data, std::span<const Index> rows);
Datasetd concatenate(std::span<const Datasetd> parts);

}  // namespace privlr

#endif  // PRIVLR_DATA_PIPELINE_HPP
