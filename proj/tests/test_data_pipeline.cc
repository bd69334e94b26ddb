#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "privlr/data_pipeline.hpp"
#include "privlr/mechanisms.hpp"

using namespace privlr;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& contents) {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "privlr_test_data_pipeline";
  std::filesystem::create_directories(dir);
  const std::filesystem::path path = dir / name;
  std::ofstream(path, std::ios::binary) << contents;
  return path;
}

CsvError::Kind csv_error_kind(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const CsvError& e) {
    return e.kind();
  }
  FAIL("expected CsvError");
  return CsvError::Kind::Malformed;
}

// Each record tagged in column 0 with a unique id so multisets can be compared.
Datasetd tagged(Index n, Index d) {
  Datasetd data;
  data.features = Eigen::MatrixXd::Zero(n, d);
  data.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    data.features(i, 0) = static_cast<double>(i);
    for (Index j = 1; j < d; ++j) data.features(i, j) = 0.001 * static_cast<double>(j);
    data.labels(i) = static_cast<int>(i % 2);
  }
  return data;
}

std::multiset<double> ids(const Datasetd& d) {
  std::multiset<double> out;
  for (Index i = 0; i < d.size(); ++i) out.insert(d.features(i, 0));
  return out;
}

double noiseless_error(const Datasetd& train, const Datasetd& test) {
  const ModelParamsd p = minimize(LogisticObjective<double>(train), ModelParamsd::Zero(train.dimension()), GdSettings{});
  return misclassification_rate(p, test);
}

}  // namespace

TEST_CASE("parse_csv") {
  SUBCASE("inline fixture") {
    const RawTable t = parse_csv("a;b\n1;2", ';', true);
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0] == std::vector<std::string>{"1", "2"});
    CHECK(t.delimiter == ';');
  }
  SUBCASE("quoting, CRLF, BOM and blank lines") {
    const RawTable t = parse_csv("\xEF\xBB\xBF\"x\",\"y\"\r\n\"a,b\",\"say \"\"hi\"\"\"\r\n\r\n\"multi\nline\",3\r\n", ',', true);
    CHECK(t.header == std::vector<std::string>{"x", "y"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0] == std::vector<std::string>{"a,b", "say \"hi\""});
    CHECK(t.rows[1] == std::vector<std::string>{"multi\nline", "3"});
  }
  SUBCASE("no header") {
    const RawTable t = parse_csv("1,2,3\n4,5,6\n", ',', false);
    CHECK(t.header == std::vector<std::string>{"c0", "c1", "c2"});
    CHECK(t.rows.size() == 2);
  }
  SUBCASE("distinct errors") {
    CHECK(csv_error_kind([] { parse_csv("", ',', true); }) == CsvError::Kind::Empty);
    CHECK(csv_error_kind([] { parse_csv("\n\n", ',', true); }) == CsvError::Kind::Empty);
    CHECK(csv_error_kind([] { parse_csv("a,b\n1,2\n3\n", ',', true); }) == CsvError::Kind::Ragged);
    CHECK(csv_error_kind([] { parse_csv("a,b\n\"1,2\n", ',', true); }) == CsvError::Kind::Malformed);
    CHECK(csv_error_kind([] { load_csv("/nonexistent/privlr.csv", ',', true); }) == CsvError::Kind::MissingFile);
  }
  SUBCASE("header without rows is empty") {
    CHECK(csv_error_kind([] { parse_csv("a,b\n", ',', true); }) == CsvError::Kind::Empty);
  }
}

TEST_CASE("load_csv reads from disk") {
  const auto path = write_temp("small.csv", "age;job;y\n30;\"admin.\";no\n41;technician;yes\n");
  const RawTable t = load_csv(path, ';', true);
  CHECK(t.header == std::vector<std::string>{"age", "job", "y"});
  CHECK(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "admin.");
}

TEST_CASE("schema parsing") {
  const ColumnSchema s = parse_schema("# bank\nage = numeric\n\njob=categorical\n id = ignore \ny = target:yes\n");
  REQUIRE(s.columns.size() == 4);
  CHECK(s.columns[0].name == "age");
  CHECK(s.columns[0].kind == ColumnKind::Numeric);
  CHECK(s.columns[1].kind == ColumnKind::Categorical);
  CHECK(s.columns[2].name == "id");
  CHECK(s.columns[2].kind == ColumnKind::Ignore);
  CHECK(s.columns[3].kind == ColumnKind::Target);
  CHECK(s.positive_class == "yes");
  CHECK(s.find("job") == &s.columns[1]);
  CHECK(s.find("missing") == nullptr);

  CHECK_THROWS_AS(parse_schema("a = numeric\n"), DataError);
  CHECK_THROWS_AS(parse_schema("a = target:1\nb = target:1\n"), DataError);
  CHECK_THROWS_AS(parse_schema("a = real\nb = target:1\n"), DataError);
  CHECK_THROWS_AS(parse_schema("a numeric\nb = target:1\n"), DataError);
  CHECK_THROWS_AS(parse_schema("a = numeric\na = numeric\nb = target:1\n"), DataError);
  CHECK_THROWS_AS(load_schema("/nonexistent/privlr.schema"), DataError);
}

TEST_CASE("label_encode") {
  const ColumnSchema schema = parse_schema("flag = categorical\nletter = categorical\nx = numeric\ny = target:yes\n");
  RawTable t;
  t.header = {"flag", "letter", "x", "y"};
  t.rows = {{"no", "b", "1.5", "yes"}, {"yes", "a", "-2", "no"}, {"no", "c", "1e-1", "no"}};
  const Datasetd d = label_encode(t, schema);
  REQUIRE(d.size() == 3);
  REQUIRE(d.dimension() == 3);
  CHECK(d.features.col(0) == Eigen::Vector3d(0, 1, 0));
  CHECK(d.features.col(1) == Eigen::Vector3d(1, 0, 2));
  CHECK(d.features.col(2) == Eigen::Vector3d(1.5, -2.0, 0.1));
  CHECK(d.labels == Eigen::Vector3i(1, 0, 0));

  SUBCASE("ignored columns are dropped") {
    RawTable u = t;
    const Datasetd e = label_encode(u, parse_schema("flag = ignore\nletter = categorical\nx = numeric\ny = target:yes\n"));
    CHECK(e.dimension() == 2);
  }
  SUBCASE("unparseable numeric names the column") {
    RawTable u = t;
    u.rows[1][2] = "abc";
    try {
      label_encode(u, schema);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("'x'") != std::string::npos);
    }
  }
  SUBCASE("non-binary target names the column") {
    RawTable u = t;
    u.rows[2][3] = "maybe";
    try {
      label_encode(u, schema);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("'y'") != std::string::npos);
    }
  }
  SUBCASE("schema must cover every column") {
    RawTable u = t;
    u.header[0] = "other";
    CHECK_THROWS_AS(label_encode(u, schema), DataError);
  }
  SUBCASE("injective per column") {
    std::mt19937_64 gen(3);
    RawTable big;
    big.header = {"cat", "y"};
    for (int i = 0; i < 500; ++i) big.rows.push_back({"v" + std::to_string(gen() % 37), i % 2 ? "yes" : "no"});
    const Datasetd e = label_encode(big, parse_schema("cat = categorical\ny = target:yes\n"));
    std::map<std::string, double> seen;
    std::set<double> codes;
    for (std::size_t i = 0; i < big.rows.size(); ++i) {
      const auto [it, inserted] = seen.emplace(big.rows[i][0], e.features(static_cast<Index>(i), 0));
      CHECK(it->second == e.features(static_cast<Index>(i), 0));
      if (inserted) codes.insert(it->second);
    }
    CHECK(codes.size() == seen.size());
  }
}

TEST_CASE("normalize") {
  SUBCASE("l1 projection divides by the norm") {
    Datasetd d;
    d.features = Eigen::RowVector4d(0.5, 0.5, 0.5, 0.5);
    d.labels = Eigen::VectorXi::Ones(1);
    const Datasetd p = project_to_l1_ball(d);
    CHECK(p.features.row(0) == Eigen::RowVector4d(0.25, 0.25, 0.25, 0.25));
  }
  SUBCASE("short records are unchanged") {
    Datasetd d;
    d.features = Eigen::RowVector3d(0.4, 0.3, 0.1);
    d.labels = Eigen::VectorXi::Zero(1);
    CHECK(project_to_l1_ball(d).features == d.features);
  }
  SUBCASE("min-max then l1, constant columns to zero") {
    Datasetd d;
    d.features.resize(3, 3);
    d.features << 0, 10, 7, 5, 20, 7, 10, 30, 7;
    d.labels = Eigen::Vector3i(0, 1, 0);
    const Datasetd n = normalize(d);
    Eigen::MatrixXd expected(3, 3);
    expected << 0, 0, 0, 0.5, 0.5, 0, 0.5, 0.5, 0;
    CHECK((n.features - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(n.labels == d.labels);
  }
  SUBCASE("test data uses training statistics and is clipped") {
    Datasetd train;
    train.features.resize(2, 2);
    train.features << 0, 0, 10, 100;
    train.labels = Eigen::Vector2i(0, 1);
    const Normalizer fitted = Normalizer::fit(train);
    CHECK(fitted.min() == Eigen::Vector2d(0, 0));
    CHECK(fitted.max() == Eigen::Vector2d(10, 100));
    Datasetd test;
    test.features.resize(2, 2);
    test.features << -5, 25, 20, 10;
    test.labels = Eigen::Vector2i(1, 1);
    const Datasetd out = fitted.apply(test);
    CHECK(out.features(0, 0) == 0.0);
    CHECK(out.features(0, 1) == doctest::Approx(0.25));
    CHECK(out.features(1, 0) == doctest::Approx(1.0 / 1.1));
    CHECK(out.features(1, 1) == doctest::Approx(0.1 / 1.1));
  }
  SUBCASE("post-condition and l1-step idempotence on random data") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> g(3.0, 10.0);
    for (int trial = 0; trial < 50; ++trial) {
      Datasetd d;
      d.features.resize(40, 1 + trial % 9);
      for (Index i = 0; i < d.features.size(); ++i) d.features.data()[i] = g(gen);
      d.labels = Eigen::VectorXi::Zero(40);
      const Datasetd n = normalize(d);
      CHECK(is_l1_normalized(n));
      CHECK((n.features.array() >= 0.0).all());
      const Datasetd again = project_to_l1_ball(n);
      CHECK((again.features - n.features).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
  SUBCASE("empty input") {
    Datasetd d;
    d.features.resize(0, 2);
    CHECK_THROWS_AS(normalize(d), DataError);
  }
}

TEST_CASE("partition") {
  SUBCASE("N = 10") {
    SplitSpec s;
    s.shuffle_seed = 1;
    const Partition p = partition(tagged(10, 2), s);
    REQUIRE(p.parties.size() == 3);
    CHECK(p.parties[0].size() == 4);
    CHECK(p.parties[1].size() == 3);
    CHECK(p.parties[2].size() == 1);
    CHECK(p.test.size() == 2);
  }
  SUBCASE("N = 45211") {
    const Partition p = partition(tagged(45211, 1), SplitSpec{});
    CHECK(p.parties[0].size() == 18084);
    CHECK(p.parties[1].size() == 13563);
    CHECK(p.parties[2].size() == 4521);
    // the floor sizes leave 45211 - 36168 = 9043 records for the test set
    CHECK(p.test.size() == 9043);
  }
  SUBCASE("disjoint, covering and deterministic") {
    const Datasetd data = tagged(997, 3);
    SplitSpec s;
    s.shuffle_seed = 42;
    const Partition a = partition(data, s);
    const Partition b = partition(data, s);
    std::multiset<double> all = ids(a.test);
    for (std::size_t i = 0; i < a.parties.size(); ++i) {
      CHECK(a.parties[i].features == b.parties[i].features);
      CHECK(a.parties[i].labels == b.parties[i].labels);
      const auto part = ids(a.parties[i]);
      all.insert(part.begin(), part.end());
    }
    CHECK(a.test.features == b.test.features);
    CHECK(all == ids(data));

    s.shuffle_seed = 43;
    CHECK_FALSE(partition(data, s).parties[0].features == a.parties[0].features);
  }
  SUBCASE("labels travel with their records") {
    const Partition p = partition(tagged(101, 2), SplitSpec{});
    for (const Datasetd& d : p.parties)
      for (Index i = 0; i < d.size(); ++i) CHECK(d.labels(i) == static_cast<int>(d.features(i, 0)) % 2);
  }
  SUBCASE("fractions summing below one leave records unassigned") {
    SplitSpec s;
    s.party_fractions = {0.5};
    s.test_fraction = 0.1;
    const Partition p = partition(tagged(100, 1), s);
    CHECK(p.parties[0].size() == 50);
    CHECK(p.test.size() == 10);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(partition(tagged(4, 1), SplitSpec{}), DataError);
    SplitSpec over;
    over.party_fractions = {0.6, 0.3};
    CHECK_THROWS_AS(partition(tagged(100, 1), over), InvalidArgument);
    SplitSpec none;
    none.party_fractions = {};
    CHECK_THROWS_AS(partition(tagged(100, 1), none), InvalidArgument);
    SplitSpec negative;
    negative.party_fractions = {0.5, -0.1};
    CHECK_THROWS_AS(partition(tagged(100, 1), negative), InvalidArgument);
  }
}

TEST_CASE("subsample") {
  const Datasetd data = tagged(1000, 2);
  SUBCASE("rate 1 keeps every record") { CHECK(ids(subsample(data, 1.0, 7)) == ids(data)); }
  SUBCASE("rate 0.5 on 100 records") { CHECK(subsample(tagged(100, 2), 0.5, 7).size() == 50); }
  SUBCASE("distinct seeds give distinct subsets") {
    const Datasetd a = subsample(data, 0.2, 1);
    const Datasetd b = subsample(data, 0.2, 2);
    CHECK(a.size() == 200);
    CHECK(ids(a) != ids(b));
    CHECK(subsample(data, 0.2, 1).features == a.features);
  }
  SUBCASE("subset of the input without repeats") {
    const Datasetd a = subsample(data, 0.3, 9);
    const auto s = ids(a);
    CHECK(std::set<double>(s.begin(), s.end()).size() == s.size());
    for (double v : s) CHECK(ids(data).count(v) == 1);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(subsample(data, 0.0, 1), InvalidArgument);
    CHECK_THROWS_AS(subsample(data, 1.5, 1), InvalidArgument);
    CHECK_THROWS_AS(subsample(tagged(3, 1), 0.2, 1), DataError);
  }
}

TEST_CASE("project_dims") {
  const Datasetd data = synthesize(50, 3, 2.0, 4);
  CHECK(project_dims(data, 3).features == data.features);
  const Datasetd one = project_dims(data, 1);
  CHECK(one.dimension() == 1);
  CHECK(one.size() == 50);
  CHECK(is_l1_normalized(one));
  CHECK(one.features.col(0) == data.features.col(0));

  Datasetd wide;
  wide.features = Eigen::RowVector3d(0.5, 0.25, 0.25) * 3.0;
  wide.labels = Eigen::VectorXi::Ones(1);
  const Datasetd two = project_dims(wide, 2);
  CHECK(two.features(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(two.features(0, 1) == doctest::Approx(1.0 / 3.0));

  CHECK_THROWS_AS(project_dims(data, 0), InvalidArgument);
  CHECK_THROWS_AS(project_dims(data, 4), InvalidArgument);
}

TEST_CASE("synthesize") {
  SUBCASE("balanced, binary and normalized") {
    const Datasetd d = synthesize(100, 5, 2.0, 1);
    CHECK(d.labels.sum() == 50);
    CHECK(((d.labels.array() == 0) || (d.labels.array() == 1)).all());
    CHECK(is_l1_normalized(d));
    CHECK(synthesize(100, 5, 2.0, 1).features == d.features);
    CHECK_FALSE(synthesize(100, 5, 2.0, 2).features == d.features);
  }
  SUBCASE("no separation is a coin flip") {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
      total += noiseless_error(synthesize(2000, 10, 0.0, seed), synthesize(2000, 10, 0.0, seed + 100));
    CHECK(std::abs(total / 10.0 - 0.5) <= 0.05);
  }
  SUBCASE("wide margin is nearly separable") {
    CHECK(noiseless_error(synthesize(2000, 10, 5.0, 11), synthesize(2000, 10, 5.0, 12)) < 0.02);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(synthesize(1, 3, 1.0, 0), InvalidArgument);
    CHECK_THROWS_AS(synthesize(10, 0, 1.0, 0), InvalidArgument);
  }
}

TEST_CASE("select_rows and concatenate") {
  const Datasetd data = tagged(6, 2);
  const std::vector<Index> rows{4, 1};
  const Datasetd picked = select_rows(data, rows);
  CHECK(picked.features(0, 0) == 4.0);
  CHECK(picked.labels(1) == 1);
  const std::vector<Datasetd> parts{picked, data};
  const Datasetd joined = concatenate(parts);
  CHECK(joined.size() == 8);
  CHECK(joined.features.bottomRows(6) == data.features);
  const std::vector<Datasetd> mismatch{data, tagged(2, 3)};
  CHECK_THROWS_AS(concatenate(mismatch), DimensionError);
}

TEST_CASE("shipped UCI schemas") {
  const ColumnSchema bank = load_schema(std::filesystem::path(PRIVLR_DATA_DIR) / "bank-full.schema");
  CHECK(bank.columns.size() == 17);
  CHECK(bank.positive_class == "yes");
  CHECK(bank.find("y")->kind == ColumnKind::Target);
  CHECK(bank.find("job")->kind == ColumnKind::Categorical);

  const ColumnSchema credit = load_schema(std::filesystem::path(PRIVLR_DATA_DIR) / "credit-default.schema");
  CHECK(credit.columns.size() == 25);
  CHECK(credit.positive_class == "1");
  CHECK(credit.find("default payment next month")->kind == ColumnKind::Target);
  CHECK(credit.find("ID")->kind == ColumnKind::Ignore);
}
