#include <doctest.h>

#include "pcm/core.hpp"
#include "pcm/error.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

using namespace pcm;

namespace {

void check_pair(const SplitPair& p, std::size_t n) {
  std::set<std::size_t> all(p.first.begin(), p.first.end());
  for (auto i : p.second) CHECK(all.insert(i).second);
  CHECK(all.size() == n);
  CHECK(*all.rbegin() == n - 1);
  CHECK(p.first.size() == (n + 1) / 2);
  CHECK(std::is_sorted(p.first.begin(), p.first.end()));
  CHECK(std::is_sorted(p.second.begin(), p.second.end()));
}

}  // namespace

TEST_CASE("dataset invariants") {
  Matrix x(2, 1);
  x << 1, 2;
  Vector y(2);
  y << 3, 4;
  Matrix z(2, 0);
  Dataset d(x, y, z);
  CHECK(d.n() == 2);
  CHECK(d.d_z() == 0);

  CHECK_THROWS_AS(Dataset(x, Vector(3), z), InvalidArgument);
  CHECK_THROWS_AS(Dataset(Matrix(2, 0), y, z), InvalidArgument);
  Vector bad = y;
  bad(1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(Dataset(x, bad, z), InvalidArgument);
  CHECK_THROWS_AS(Dataset(Matrix(0, 1), Vector(0), Matrix(0, 0)), InvalidArgument);

  const std::vector<std::size_t> rows{1, 0};
  const Dataset s = d.subset(rows);
  CHECK(s.y()(0) == 4);
  CHECK(s.x()(1, 0) == 1);
}

TEST_CASE("split of two points is one of the two balanced partitions") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = split(2, RngStream(seed));
    REQUIRE(p.first.size() == 1);
    REQUIRE(p.second.size() == 1);
    CHECK(p.first[0] + p.second[0] == 1);
  }
}

TEST_CASE("split is deterministic and balanced") {
  const RngStream s(42, 7);
  const auto a = split(4, s);
  const auto b = split(4, s);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);

  const auto big = split(1000, RngStream(9));
  CHECK(big.first.size() == 500);
  CHECK(big.second.size() == 500);
  check_pair(big, 1000);
  check_pair(split(7, RngStream(3)), 7);

  CHECK_THROWS_AS(split(1, s), InvalidArgument);
  CHECK_THROWS_AS(split(0, s), InvalidArgument);
}

TEST_CASE("split is close to uniform over balanced partitions of 4") {
  // 6 balanced partitions of {0,1,2,3}; each should appear about 1/6 of the time.
  std::map<IndexSet, int> counts;
  const int draws = 6000;
  for (int i = 0; i < draws; ++i) counts[split(4, RngStream(1, static_cast<std::uint64_t>(i))).first]++;
  CHECK(counts.size() == 6);
  for (const auto& [key, c] : counts) CHECK(std::abs(c - draws / 6) < 150);
}

TEST_CASE("multi_split gives B valid pairs") {
  const auto plan = multi_split(4, 3, RngStream(5));
  CHECK(plan.pairs.size() == 3);
  CHECK(plan.total_n == 4);
  for (const auto& p : plan.pairs) check_pair(p, 4);

  const auto six = multi_split(100, 6, RngStream(5));
  CHECK(six.pairs.size() == 6);
  for (const auto& p : six.pairs) check_pair(p, 100);

  const auto two = multi_split(2, 2, RngStream(5));
  for (const auto& p : two.pairs) check_pair(p, 2);

  CHECK_THROWS_AS(multi_split(4, 0, RngStream(5)), InvalidArgument);
}

TEST_CASE("rng streams") {
  const RngStream a(1, 2);
  CHECK(a == RngStream(1, 2));
  auto e1 = a.engine();
  auto e2 = a.engine();
  CHECK(e1() == e2());
  CHECK(a.derive(3) == a.derive(3));
  CHECK(a.derive(3).engine()() != a.derive(4).engine()());
  CHECK(RngStream(1, 2).engine()() != RngStream(1, 3).engine()());
}

TEST_CASE("partition sizes") {
  const auto folds = partition(10, 4, RngStream(2));
  REQUIRE(folds.size() == 4);
  std::set<std::size_t> all;
  for (const auto& f : folds) {
    CHECK((f.size() == 2 || f.size() == 3));
    all.insert(f.begin(), f.end());
  }
  CHECK(all.size() == 10);
  CHECK_THROWS_AS(partition(3, 4, RngStream(2)), InvalidArgument);
}

TEST_CASE("column schema parsing") {
  const auto s = ColumnSchema::parse("x=x1,x2;y=y;z=z1..z3");
  CHECK(s.x == std::vector<std::string>{"x1", "x2"});
  CHECK(s.y == "y");
  CHECK(s.z == std::vector<std::string>{"z1", "z2", "z3"});
  CHECK(ColumnSchema::parse(s.to_string()).z == s.z);
  CHECK_THROWS_AS(ColumnSchema::parse("x=a;y=b,c"), SchemaError);
  CHECK_THROWS_AS(ColumnSchema::parse("y=b"), SchemaError);
  CHECK(ColumnSchema::default_for(1, 2).z == std::vector<std::string>{"z1", "z2"});
}

TEST_CASE("load a three-row csv") {
  std::istringstream in("x1,y,z1\n1,2,3\n4,5,6\n7,8,9\n");
  const auto d = read_dataset(in, ColumnSchema::parse("x=x1;y=y;z=z1"));
  CHECK(d.n() == 3);
  CHECK(d.d_x() == 1);
  CHECK(d.d_z() == 1);
  CHECK(d.z()(2, 0) == 9);
}

TEST_CASE("csv errors") {
  const auto schema = ColumnSchema::parse("x=x1;y=y;z=z1");
  {
    std::istringstream in("x1,y,z1\n1,2,3\n4,nan,6\n");
    try {
      read_dataset(in, schema);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.row() == 1);
      CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
  }
  {
    std::istringstream in("x1,y,z1\n1,abc,3\n");
    CHECK_THROWS_AS(read_dataset(in, schema), ParseError);
  }
  {
    std::istringstream in("x1,y,z1\n1,inf,3\n");
    CHECK_THROWS_AS(read_dataset(in, schema), ParseError);
  }
  {
    std::istringstream in("x1,y\n1,2\n");
    CHECK_THROWS_AS(read_dataset(in, schema), SchemaError);
  }
  {
    std::istringstream in("");
    CHECK_THROWS_AS(read_dataset(in, schema), InvalidArgument);
  }
  {
    std::istringstream in("x1,y,z1\n1,2\n");
    CHECK_THROWS_AS(read_dataset(in, schema), ParseError);
  }
}

TEST_CASE("csv round trip is bit exact") {
  auto rng = RngStream(11).engine();
  std::normal_distribution<double> normal;
  Matrix x(25, 2);
  Vector y(25);
  Matrix z(25, 3);
  for (Index i = 0; i < 25; ++i) {
    x(i, 0) = normal(rng) * 1e-7;
    x(i, 1) = normal(rng) * 1e12;
    y(i) = normal(rng) / 3.0;
    for (Index j = 0; j < 3; ++j) z(i, j) = normal(rng);
  }
  y(0) = 5e-324;
  const Dataset d(x, y, z);
  const auto schema = ColumnSchema::default_for(2, 3);
  const auto path = std::filesystem::temp_directory_path() / "pcm_roundtrip_test.csv";
  save_dataset(path, d, schema);
  const Dataset back = load_dataset(path, schema);
  std::filesystem::remove(path);
  CHECK(back.x() == d.x());
  CHECK(back.y() == d.y());
  CHECK(back.z() == d.z());
  CHECK_THROWS_AS(load_dataset(path, schema), InvalidArgument);
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hits(100, 0);
  parallel_for(100, 4, [&](std::size_t i) { hits[i]++; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 5) throw InvalidArgument("boom");
                               }),
                  InvalidArgument);
}
