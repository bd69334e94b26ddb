#include "privlr/data_pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "privlr/random.hpp"

namespace privlr {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string read_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError(CsvError::Kind::MissingFile, std::string(what) + ": cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

RawTable parse_csv(std::string_view text, char delimiter, bool has_header) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool line_has_content = false;
  std::size_t line = 1;

  auto end_record = [&] {
    if (line_has_content) {
      record.push_back(std::move(field));
      records.push_back(std::move(record));
    }
    record.clear();
    field.clear();
    line_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      line_has_content = true;
    } else if (c == delimiter) {
      record.push_back(std::move(field));
      field.clear();
      line_has_content = true;
    } else if (c == '\n') {
      end_record();
      ++line;
    } else if (c == '\r') {
      // CRLF line endings
    } else {
      field.push_back(c);
      line_has_content = true;
    }
  }
  if (in_quotes) throw CsvError(CsvError::Kind::Malformed, "csv: unterminated quoted field near line " + std::to_string(line));
  end_record();

  if (records.empty()) throw CsvError(CsvError::Kind::Empty, "csv: table is empty");

  RawTable table;
  table.delimiter = delimiter;
  std::size_t first_row = 0;
  if (has_header) {
    table.header = records.front();
    for (auto& h : table.header) h = std::string(trim(h));
    first_row = 1;
  } else {
    for (std::size_t c = 0; c < records.front().size(); ++c) table.header.push_back("c" + std::to_string(c));
  }
  if (records.size() == first_row) throw CsvError(CsvError::Kind::Empty, "csv: table has a header but no rows");

  for (std::size_t r = first_row; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      std::ostringstream os;
      os << "csv: record " << r + 1 << " has " << records[r].size() << " fields, expected " << table.header.size();
      throw CsvError(CsvError::Kind::Ragged, os.str());
    }
  }
  table.rows.assign(std::make_move_iterator(records.begin() + static_cast<std::ptrdiff_t>(first_row)),
                    std::make_move_iterator(records.end()));
  return table;
}

RawTable load_csv(const std::filesystem::path& path, char delimiter, bool has_header) {
  return parse_csv(read_file(path, "load_csv"), delimiter, has_header);
}

const ColumnSpec* ColumnSchema::find(std::string_view name) const {
  for (const ColumnSpec& c : columns)
    if (c.name == name) return &c;
  return nullptr;
}

ColumnSchema parse_schema(std::string_view text) {
  ColumnSchema schema;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  int targets = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view entry = trim(raw);
    if (entry.empty() || entry.front() == '#') continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos)
      throw DataError("schema line " + std::to_string(line) + ": expected 'column = kind'");
    ColumnSpec spec{std::string(trim(entry.substr(0, eq))), ColumnKind::Numeric};
    const std::string_view kind = trim(entry.substr(eq + 1));
    if (spec.name.empty()) throw DataError("schema line " + std::to_string(line) + ": empty column name");
    if (kind == "numeric") {
      spec.kind = ColumnKind::Numeric;
    } else if (kind == "categorical") {
      spec.kind = ColumnKind::Categorical;
    } else if (kind == "ignore") {
      spec.kind = ColumnKind::Ignore;
    } else if (kind.starts_with("target:")) {
      spec.kind = ColumnKind::Target;
      schema.positive_class = std::string(trim(kind.substr(7)));
      ++targets;
    } else {
      throw DataError("schema line " + std::to_string(line) + ": unknown column kind '" + std::string(kind) + "'");
    }
    if (schema.find(spec.name)) throw DataError("schema: column '" + spec.name + "' listed twice");
    schema.columns.push_back(std::move(spec));
  }
  if (targets != 1) throw DataError("schema: exactly one target column is required (found " + std::to_string(targets) + ")");
  return schema;
}

ColumnSchema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("load_schema: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_schema(ss.str());
}

Datasetd label_encode(const RawTable& table, const ColumnSchema& schema) {
  std::vector<const ColumnSpec*> specs;
  for (const std::string& name : table.header) {
    const ColumnSpec* spec = schema.find(name);
    if (!spec) throw DataError("label_encode: schema has no entry for column '" + name + "'");
    specs.push_back(spec);
  }
  for (const ColumnSpec& c : schema.columns) {
    if (std::find(table.header.begin(), table.header.end(), c.name) == table.header.end())
      throw DataError("label_encode: schema column '" + c.name + "' not present in table");
  }

  const Index n = static_cast<Index>(table.rows.size());
  std::vector<std::size_t> feature_cols;
  std::size_t target_col = 0;
  for (std::size_t c = 0; c < specs.size(); ++c) {
    if (specs[c]->kind == ColumnKind::Target)
      target_col = c;
    else if (specs[c]->kind != ColumnKind::Ignore)
      feature_cols.push_back(c);
  }

  Datasetd out;
  out.features.resize(n, static_cast<Index>(feature_cols.size()));
  out.labels.resize(n);

  for (std::size_t f = 0; f < feature_cols.size(); ++f) {
    const std::size_t c = feature_cols[f];
    const std::string& name = table.header[c];
    if (specs[c]->kind == ColumnKind::Categorical) {
      std::set<std::string> distinct;
      for (const auto& row : table.rows) distinct.insert(row[c]);
      std::map<std::string, int> code;
      int next = 0;
      for (const std::string& v : distinct) code.emplace(v, next++);
      for (Index r = 0; r < n; ++r) out.features(r, static_cast<Index>(f)) = code.at(table.rows[r][c]);
    } else {
      for (Index r = 0; r < n; ++r) {
        const std::string_view cell = trim(table.rows[r][c]);
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
        if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
          std::ostringstream os;
          os << "label_encode: column '" << name << "', row " << r + 1 << ": cannot parse '" << cell << "' as a number";
          throw DataError(os.str());
        }
        out.features(r, static_cast<Index>(f)) = value;
      }
    }
  }

  std::set<std::string> target_values;
  for (Index r = 0; r < n; ++r) {
    const std::string_view cell = trim(table.rows[r][target_col]);
    target_values.emplace(cell);
    out.labels(r) = cell == schema.positive_class ? 1 : 0;
  }
  if (target_values.size() > 2)
    throw DataError("label_encode: target column '" + table.header[target_col] + "' has " +
                    std::to_string(target_values.size()) + " distinct values, expected at most 2");
  return out;
}

Normalizer Normalizer::fit(const Datasetd& train) {
  if (train.empty()) throw DataError("normalize: empty dataset");
  Normalizer n;
  n.min_ = train.features.colwise().minCoeff().transpose();
  n.max_ = train.features.colwise().maxCoeff().transpose();
  return n;
}

Datasetd Normalizer::apply(Datasetd data) const {
  if (data.dimension() != min_.size())
    throw DimensionError(detail::mismatch_message("Normalizer::apply", min_.size(), data.dimension()));
  for (Index c = 0; c < data.dimension(); ++c) {
    const double range = max_(c) - min_(c);
    auto col = data.features.col(c);
    if (range > 0.0)
      col = ((col.array() - min_(c)) / range).cwiseMax(0.0).cwiseMin(1.0).matrix();
    else
      col.setZero();
  }
  return project_to_l1_ball(std::move(data));
}

Datasetd normalize(const Datasetd& data) { return Normalizer::fit(data).apply(data); }

Datasetd project_to_l1_ball(Datasetd data) {
  // Rows already within rounding of the unit sphere are left untouched so the
  // projection is exactly idempotent.
  constexpr double kTolerance = 1e-12;
  for (Index r = 0; r < data.size(); ++r) {
    const double norm = data.features.row(r).lpNorm<1>();
    if (norm > 1.0 + kTolerance) data.features.row(r) /= norm;
  }
  return data;
}

void SplitSpec::validate() const {
  if (party_fractions.empty()) throw InvalidArgument("SplitSpec: at least one party fraction is required");
  double total = test_fraction;
  for (double f : party_fractions) {
    if (!(f > 0.0)) throw InvalidArgument("SplitSpec: party fractions must be > 0");
    total += f;
  }
  if (!(test_fraction > 0.0)) throw InvalidArgument("SplitSpec: test_fraction must be > 0");
  if (total > 1.0 + 1e-9) throw InvalidArgument("SplitSpec: fractions sum to more than 1");
}

Datasetd select_rows(const Datasetd& data, std::span<const Index> rows) {
  Datasetd out;
  out.features.resize(static_cast<Index>(rows.size()), data.dimension());
  out.labels.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Index>(i)) = data.features.row(rows[i]);
    out.labels(static_cast<Index>(i)) = data.labels(rows[i]);
  }
  return out;
}

Datasetd concatenate(std::span<const Datasetd> parts) {
  if (parts.empty()) return {};
  Index n = 0;
  const Index d = parts.front().dimension();
  for (const Datasetd& p : parts) {
    if (p.dimension() != d) throw DimensionError(detail::mismatch_message("concatenate", d, p.dimension()));
    n += p.size();
  }
  Datasetd out;
  out.features.resize(n, d);
  out.labels.resize(n);
  Index at = 0;
  for (const Datasetd& p : parts) {
    out.features.middleRows(at, p.size()) = p.features;
    out.labels.segment(at, p.size()) = p.labels;
    at += p.size();
  }
  return out;
}

namespace {

std::vector<Index> shuffled_indices(Index n, std::uint64_t seed) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  Rng rng(seed);
  rng.shuffle(idx);
  return idx;
}

}  // namespace

Partition partition(const Datasetd& data, const SplitSpec& spec) {
  spec.validate();
  const Index n = data.size();
  const std::vector<Index> order = shuffled_indices(n, spec.shuffle_seed);

  double assigned = spec.test_fraction;
  for (double f : spec.party_fractions) assigned += f;
  const Index unused = std::max<Index>(0, static_cast<Index>(std::floor((1.0 - assigned) * static_cast<double>(n))));

  Partition out;
  Index at = 0;
  for (std::size_t p = 0; p < spec.party_fractions.size(); ++p) {
    const Index count = static_cast<Index>(std::floor(spec.party_fractions[p] * static_cast<double>(n)));
    if (count == 0) throw DataError("partition: party " + std::to_string(p) + " receives no records");
    out.parties.push_back(select_rows(data, std::span(order).subspan(static_cast<std::size_t>(at), static_cast<std::size_t>(count))));
    at += count;
  }
  const Index test_count = std::max<Index>(0, n - at - unused);
  out.test = select_rows(data, std::span(order).subspan(static_cast<std::size_t>(at), static_cast<std::size_t>(test_count)));
  return out;
}

Datasetd subsample(const Datasetd& data, double rate, std::uint64_t seed) {
  if (!(rate > 0.0 && rate <= 1.0)) throw InvalidArgument("subsample: rate must lie in (0, 1]");
  const Index keep = static_cast<Index>(std::floor(rate * static_cast<double>(data.size())));
  if (keep == 0) throw DataError("subsample: no records left at rate " + std::to_string(rate));
  std::vector<Index> idx = shuffled_indices(data.size(), seed);
  idx.resize(static_cast<std::size_t>(keep));
  std::sort(idx.begin(), idx.end());
  return select_rows(data, idx);
}

Datasetd project_dims(const Datasetd& data, Index k) {
  if (k < 1 || k > data.dimension())
    throw InvalidArgument("project_dims: k = " + std::to_string(k) + " outside [1, " + std::to_string(data.dimension()) + "]");
  Datasetd out{data.features.leftCols(k), data.labels};
  return project_to_l1_ball(std::move(out));
}

Datasetd synthesize(Index n, Index d, double separation, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("synthesize: n must be >= 2");
  if (d < 1) throw InvalidArgument("synthesize: d must be >= 1");
  Eigen::VectorXd direction(d);
  for (Index j = 0; j < d; ++j) direction(j) = j % 2 == 0 ? 1.0 : -1.0;
  const Eigen::VectorXd center = (separation / std::sqrt(static_cast<double>(d))) * direction;

  Rng rng(seed);
  Datasetd out;
  out.features.resize(n, d);
  out.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    const int label = i % 2 == 0 ? 1 : 0;
    out.labels(i) = label;
    for (Index j = 0; j < d; ++j) out.features(i, j) = (label == 1 ? center(j) : -center(j)) + rng.normal();
  }
  return normalize(out);
}

}  // namespace privlr
