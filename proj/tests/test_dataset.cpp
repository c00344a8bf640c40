#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "elspot/dataset.hpp"
#include "elspot/errors.hpp"
#include "elspot/generator.hpp"
#include "elspot/network.hpp"
#include "elspot/rng.hpp"

using namespace elspot;

namespace {

MarketNetwork toy_network() {
  std::vector<Arc> arcs = {{"a1", 0, 1, 100.0, 90.0}, {"a2", 1, 0, 100.0, 95.0}};
  return MarketNetwork({"A", "B"}, arcs, {{0, 1}});
}

PanelDataset toy_dataset(int T = 4) {
  PanelDataset d;
  d.period_minutes = 30;
  for (int t = 0; t < T; ++t) d.timestamps.push_back(1265500800 + 1800 * t);
  d.price = {std::vector<double>(T, 30.0), std::vector<double>(T, 40.0)};
  d.load = {std::vector<double>(T, 500.0), std::vector<double>(T, 400.0)};
  d.flow = {std::vector<double>(T, 10.0), std::vector<double>(T, 0.0)};
  return d;
}

}  // namespace

TEST_SUITE_BEGIN("dataset");

TEST_CASE("three aligned series of length 4 validate") {
  auto net = toy_network();
  auto d = toy_dataset();
  d.finalize(net);
  CHECK(d.T() == 4);
  // supply identity: A exports 10, B imports 10
  CHECK(d.supply[0][0] == doctest::Approx(510.0));
  CHECK(d.supply[1][0] == doctest::Approx(390.0));
  CHECK(d.log_price[0][0] == doctest::Approx(std::log(1031.0)));
}

TEST_CASE("negative flow names the arc and period") {
  auto net = toy_network();
  auto d = toy_dataset();
  d.flow[0][2] = -5.0;
  try {
    d.finalize(net);
    FAIL("expected validation error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("a1") != std::string::npos);
    CHECK(msg.find("t=2") != std::string::npos);
  }
}

TEST_CASE("complementarity violations error by default, lenient mode zeroes the smaller") {
  auto net = toy_network();
  auto d = toy_dataset();
  d.flow[0][1] = 20.0;
  d.flow[1][1] = 5.0;
  CHECK_THROWS_AS(d.finalize(net), ValidationError);

  auto d2 = toy_dataset();
  d2.flow[0][1] = 20.0;
  d2.flow[1][1] = 5.0;
  IngestOptions opts;
  opts.lenient_complementarity = true;
  d2.finalize(net, opts);
  CHECK(d2.flow[1][1] == 0.0);
  CHECK(d2.flow[0][1] == 20.0);
}

TEST_CASE("misaligned timestamps name the first offender") {
  auto net = toy_network();
  auto d = toy_dataset();
  d.timestamps[3] += 60;
  CHECK_THROWS_WITH_AS(d.finalize(net),
                       doctest::Contains("not equally spaced"), ValidationError);
}

TEST_CASE("supply identity: conservation under balanced trade") {
  // random 3-region network; when total exports equal total imports the
  // regional supplies sum to loads plus loss adjustments
  std::vector<Arc> arcs = {{"x", 0, 1, 50.0, 50.0}, {"y", 1, 0, 50.0, 50.0},
                           {"z", 1, 2, 80.0, 80.0}, {"w", 2, 1, 80.0, 80.0}};
  MarketNetwork net({"A", "B", "C"}, arcs, {{0, 1}, {2, 3}});
  Rng rng(3);
  PanelDataset d;
  d.period_minutes = 30;
  const int T = 16;
  for (int t = 0; t < T; ++t) d.timestamps.push_back(1265500800 + 1800 * t);
  d.price.assign(3, std::vector<double>(T, 25.0));
  d.load.assign(3, std::vector<double>(T));
  d.flow.assign(4, std::vector<double>(T, 0.0));
  d.loss_adj.assign(3, std::vector<double>(T));
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < 3; ++i) {
      d.load[i][t] = 300.0 + 100.0 * rng.uniform();
      d.loss_adj[i][t] = rng.uniform() - 0.5;
    }
    d.flow[0][t] = 40.0 * rng.uniform();
    d.flow[2][t] = 60.0 * rng.uniform();
  }
  d.finalize(net);
  for (int t = 0; t < T; ++t) {
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < 3; ++i) {
      lhs += d.supply[i][t];
      rhs += d.load[i][t] + d.loss_adj[i][t];
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
  // recompute via build_supply and compare exactly
  for (int i = 0; i < 3; ++i) {
    const auto s = build_supply(d, net, i);
    for (int t = 0; t < T; ++t) CHECK(s[t] == d.supply[i][t]);
  }
}

TEST_CASE("log transform examples and round trip") {
  TransformSpec tr;
  CHECK(tr.to_log(0.0) == doctest::Approx(std::log(1001.0)));
  CHECK(tr.to_log(-1000.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(tr.to_log(-1001.0), ValidationError);
  // back-transform of the VIC baseline component mean
  CHECK(tr.from_log(6.928) == doctest::Approx(19.4).epsilon(0.01));
  for (double p = -1000.0; p <= 15000.0; p += 157.3) {
    CHECK(tr.from_log(tr.to_log(p)) == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("normalization maps bounds to the unit interval") {
  NormBounds b = bounds_of({2.0, 6.0, 4.0});
  CHECK(b.normalize(2.0) == 0.0);
  CHECK(b.normalize(6.0) == 1.0);
  CHECK(b.normalize(4.0) == doctest::Approx(0.5));
  CHECK(b.normalize(8.0) > 1.0);  // out-of-range values are not clipped
  CHECK_THROWS_AS(bounds_of(std::vector<double>(3, 1.0)), ValidationError);
}

TEST_CASE("generated dataset round-trips through CSV bit-exactly") {
  auto spec = two_region_spec(99);
  auto gen = generate(spec, 64);
  const std::string dir = "test_roundtrip_csv";
  write_dataset_csv(gen.data, spec.network, dir);
  PanelDataset back = ingest_csv(
      {dir + "/prices.csv", dir + "/loads.csv", dir + "/flows.csv", dir + "/losses.csv"},
      spec.network);
  REQUIRE(back.T() == gen.data.T());
  for (std::size_t t = 0; t < back.T(); ++t) {
    CHECK(back.timestamps[t] == gen.data.timestamps[t]);
    for (int j = 0; j < 2; ++j) {
      CHECK(back.price[j][t] == doctest::Approx(gen.data.price[j][t]).epsilon(1e-11));
      CHECK(back.load[j][t] == doctest::Approx(gen.data.load[j][t]).epsilon(1e-11));
    }
  }
  std::filesystem::remove_all(dir);
}

TEST_SUITE_END();
