#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include <unistd.h>

#include "test_support.hpp"
#include "tsgp/data.hpp"
#include "tsgp/error.hpp"

using namespace tsgp;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path p = fs::temp_directory_path() / ("tsgp_data_" + std::to_string(::getpid()));
  fs::create_directories(p);
  return p;
}

std::string write_text(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << text;
  return p.string();
}

}  // namespace

TEST_CASE("three-row csv") {
  const auto path = write_text("three.csv", "a,b,y\n1,2,3\n4,5,6\n7,8,12\n");
  const Dataset d = load_csv(path);
  REQUIRE(d.size() == 3);
  REQUIRE(d.dim() == 2);
  MatrixXd x(3, 2);
  x << 1, 2, 4, 5, 7, 8;
  VectorXd y(3);
  y << 3, 6, 12;
  CHECK(d.x_raw == x);
  CHECK(d.y_raw == y);
  CHECK(d.norm.x_means[0] == 4.0);
  CHECK(d.norm.x_means[1] == 5.0);
  CHECK(d.norm.y_mean == 7.0);
  CHECK(d.x(0, 0) == -3.0);
  CHECK(d.y[2] == 5.0);
  CHECK(d.name == "three.csv");

  CsvOptions by_name;
  by_name.target = "a";
  const Dataset e = load_csv(path, by_name);
  CHECK(e.y_raw[1] == 4.0);
  CHECK(e.x_raw(1, 1) == 6.0);

  CsvOptions by_index;
  by_index.target_index = 1;
  CHECK(load_csv(path, by_index).y_raw[2] == 8.0);

  const auto bare = write_text("bare.csv", "1,2\n3,4\n");
  CsvOptions no_header;
  no_header.header = false;
  const Dataset b = load_csv(bare, no_header);
  CHECK(b.size() == 2);
  CHECK(b.y_raw[1] == 4.0);
}

TEST_CASE("non-finite rows are dropped with a count") {
  const auto path = write_text("nan.csv", "x,y\n1,2\nnan,3\n4,inf\n5,6\n");
  int rejected = -1;
  const Dataset d = load_csv(path, {}, &rejected);
  CHECK(d.size() == 2);
  CHECK(rejected == 2);
  const auto one = write_text("nan1.csv", "x,y\n1,2\n2,NaN\n3,4\n");
  CHECK(load_csv(one, {}, &rejected).size() == 2);
  CHECK(rejected == 1);
}

TEST_CASE("csv errors") {
  CHECK_THROWS_AS(load_csv((scratch_dir() / "absent.csv").string()), IoError);
  CHECK_THROWS_AS(load_csv(write_text("bad.csv", "x,y\n1,abc\n")), ParseError);
  CHECK_THROWS_AS(load_csv(write_text("ragged.csv", "x,y\n1,2\n3\n")), ParseError);
  CHECK_THROWS_AS(load_csv(write_text("empty.csv", "x,y\n")), EmptyDataset);
  CHECK_THROWS_AS(load_csv(write_text("allnan.csv", "x,y\nnan,1\n")), EmptyDataset);
  CsvOptions named;
  named.target = "z";
  CHECK_THROWS_AS(load_csv(write_text("named.csv", "x,y\n1,2\n"), named), ParseError);
  CsvOptions counts;
  counts.counts = true;
  CHECK_THROWS_AS(load_csv(write_text("neg.csv", "x,y\n1,-2\n"), counts), ParseError);
  CHECK_THROWS_AS(load_csv(write_text("frac.csv", "x,y\n1,2.5\n"), counts), ParseError);
}

TEST_CASE("write then load is bit-identical") {
  const Dataset d = make_synthetic_regression(50, 3, 0.3, 12);
  const auto path = (scratch_dir() / "rt.csv").string();
  write_csv(path, d);
  const Dataset e = load_csv(path);
  CHECK(e.x_raw == d.x_raw);
  CHECK(e.y_raw == d.y_raw);
  CHECK(e.x == d.x);
  CHECK(e.y == d.y);

  // Awkward values survive 17 significant digits.
  Dataset w = normalize(MatrixXd::Constant(2, 1, 0.1), VectorXd::Constant(2, 1.0 / 3.0), "w");
  w.x_raw(1, 0) = 1e-300;
  w.y_raw[1] = -123456.78901234567;
  write_csv(path, w);
  const Dataset f = load_csv(path);
  CHECK(f.x_raw == w.x_raw);
  CHECK(f.y_raw == w.y_raw);

  const MatrixXd m = load_matrix_csv(path);
  CHECK(m.cols() == 2);
  CHECK(m(1, 1) == w.y_raw[1]);
}

TEST_CASE("normalization invariants") {
  const Dataset d = make_synthetic_regression(137, 4, 0.5, 2);
  CHECK(d.x.colwise().mean().cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs(d.y.mean()) < 1e-10);
  CHECK((d.denormalize(d.y) - d.y_raw).cwiseAbs().maxCoeff() < 1e-10);

  const Dataset c = make_poisson_toy(1);
  CHECK(c.counts);
  CHECK(c.norm.y_mean == 0.0);
  CHECK(c.y == c.y_raw);
}

TEST_CASE("poisson toy data") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset d = make_poisson_toy(seed);
    REQUIRE(d.size() == 50);
    CHECK(d.x_raw(0, 0) == -10.0);
    CHECK(d.x_raw(49, 0) == 10.0);
    for (Eigen::Index i = 1; i < 50; ++i)
      CHECK(d.x_raw(i, 0) - d.x_raw(i - 1, 0) == doctest::Approx(20.0 / 49.0).epsilon(1e-12));
    CHECK(d.y_raw.minCoeff() >= 0.0);
    CHECK((d.y_raw.array() == d.y_raw.array().round()).all());
    const double mean = d.y_raw.mean();
    CHECK(mean >= 2.5);
    CHECK(mean <= 4.5);
  }
  CHECK(make_poisson_toy(4).y_raw == make_poisson_toy(4).y_raw);
  CHECK(make_poisson_toy(4).y_raw != make_poisson_toy(5).y_raw);
}

TEST_CASE("snelson-like data") {
  const Dataset table = snelson_like_table();
  REQUIRE(table.size() == 200);
  CHECK(table.x_raw.minCoeff() >= 0.0);
  CHECK(table.x_raw.maxCoeff() <= 6.0);

  auto sorted_x = [](const Dataset& d) {
    std::vector<double> v(d.x_raw.data(), d.x_raw.data() + d.size());
    std::sort(v.begin(), v.end());
    return v;
  };
  // n >= the table size returns every row.
  CHECK(sorted_x(make_snelson_like(200, 3)) == sorted_x(table));
  CHECK(make_snelson_like(500, 3).size() == 200);

  const Dataset s = make_snelson_like(40, 0);
  CHECK(s.size() == 40);
  std::set<double> table_x(table.x_raw.data(), table.x_raw.data() + 200);
  std::set<double> seen;
  for (Eigen::Index i = 0; i < 40; ++i) {
    CHECK(table_x.count(s.x_raw(i, 0)) == 1u);
    seen.insert(s.x_raw(i, 0));
  }
  CHECK(seen.size() == 40u);
  CHECK(make_snelson_like(40, 0).x_raw == s.x_raw);
  CHECK(make_snelson_like(40, 0).y_raw == s.y_raw);
  CHECK(make_snelson_like(40, 1).x_raw != s.x_raw);
}

TEST_CASE("seeded splits") {
  const Split a = split_indices(103, 0.2, 0.2, 9);
  const Split b = split_indices(103, 0.2, 0.2, 9);
  CHECK(a.train == b.train);
  CHECK(a.validation == b.validation);
  CHECK(a.test == b.test);
  CHECK(a.test.size() == 21u);
  CHECK(a.validation.size() == 16u);
  CHECK(a.train.size() == 66u);
  std::set<Eigen::Index> all(a.train.begin(), a.train.end());
  all.insert(a.validation.begin(), a.validation.end());
  all.insert(a.test.begin(), a.test.end());
  CHECK(all.size() == 103u);
  CHECK(split_indices(103, 0.2, 0.2, 10).test != a.test);

  const Split none = split_indices(10, 0.0, 0.0, 1);
  CHECK(none.train.size() == 10u);
  CHECK(none.test.empty());
  CHECK_THROWS_AS(split_indices(10, 1.0, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(split_indices(10, -0.1, 0.0, 1), ConfigError);
}

TEST_CASE("held-out subsets share the training shift") {
  const Dataset d = make_synthetic_regression(40, 2, 0.1, 1);
  const Split s = split_indices(40, 0.25, 0.0, 3);
  const Dataset train = subset(d, s.train);
  const Dataset test = subset(d, s.test, train.norm);
  CHECK(train.x.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
  CHECK(test.norm.y_mean == train.norm.y_mean);
  for (std::size_t k = 0; k < s.test.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    CHECK(test.y[i] == d.y_raw[s.test[k]] - train.norm.y_mean);
  }
  const std::vector<Eigen::Index> bad{40};
  CHECK_THROWS_AS(subset(d, bad), IndexOutOfRange);
}
