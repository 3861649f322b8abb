#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "ghostkit/thresholding.hpp"

using namespace ghostkit;

namespace {

AcquisitionRun run_with_T(const std::vector<double>& ts) {
  AcquisitionRun run;
  run.config.width = 2;
  run.config.height = 2;
  for (std::size_t m = 0; m < ts.size(); ++m)
    run.records.push_back({m, ts[m], 1.0, ts[m]});
  return run;
}

// dT of [+3, +2, +1, -1, -2, -3, -4] * 1e-3 around 0.5
AcquisitionRun seven() {
  return run_with_T({0.503, 0.502, 0.501, 0.499, 0.498, 0.497, 0.496});
}

} // namespace

TEST_CASE("mean transmission estimate is a prefix average") {
  const AcquisitionRun run = run_with_T({0.2, 0.4, 0.6});
  CHECK(estimate_mean_transmission(run, 1) == 0.2);
  CHECK(estimate_mean_transmission(run, 2) == Catch::Approx(0.3));
  CHECK(estimate_mean_transmission(run, 3) == Catch::Approx(0.4));
  CHECK_THROWS_AS(estimate_mean_transmission(run, 0), precondition_error);
  CHECK_THROWS_AS(estimate_mean_transmission(run, 4), insufficient_frames_error);
}

TEST_CASE("threshold pairs must be sane") {
  CHECK_NOTHROW((ThresholdPair{0.5, 0.0, 0.0}).validate());
  CHECK_THROWS_AS((ThresholdPair{0.5, -0.001, 0.0}).validate(), precondition_error);
  CHECK_THROWS_AS((ThresholdPair{0.5, 0.0, -0.001}).validate(), precondition_error);
  const double nan = std::nan("");
  CHECK_THROWS_AS((ThresholdPair{nan, 0.0, 0.0}).validate(), precondition_error);
  CHECK_THROWS_AS((ThresholdPair{0.5, nan, 0.0}).validate(), precondition_error);
}

TEST_CASE("partition splits strictly beyond each cut") {
  const AcquisitionRun run = seven();
  const Registers regs = partition_frames(run, {0.5, 0.0015, 0.0015});
  CHECK(regs.a == std::vector<std::uint64_t>{0, 1});
  CHECK(regs.b == std::vector<std::uint64_t>{4, 5, 6});
  CHECK_FALSE(regs.balanced());
}

TEST_CASE("boundary equality selects nothing") {
  // dyadic excursions of +-{2,3}/1024 with cuts at exactly 2/1024
  const double u = 1.0 / 1024.0;
  const AcquisitionRun run =
      run_with_T({0.5 + 2 * u, 0.5 + 3 * u, 0.5 - 3 * u, 0.5 - 2 * u});
  const Registers regs = partition_frames(run, {0.5, 2 * u, 2 * u});
  CHECK(regs.a == std::vector<std::uint64_t>{1});
  CHECK(regs.b == std::vector<std::uint64_t>{2});
}

TEST_CASE("zero thresholds split on the sign of the excursion") {
  const AcquisitionRun run = seven();
  const Registers regs = partition_frames(run, {0.5, 0.0, 0.0});
  CHECK(regs.a == std::vector<std::uint64_t>{0, 1, 2});
  CHECK(regs.b == std::vector<std::uint64_t>{3, 4, 5, 6});
}

TEST_CASE("an unreachable cut reports the empty register") {
  const AcquisitionRun run = seven();
  CHECK_THROWS_AS(partition_frames(run, {0.5, 0.5, 0.0015}), empty_register_error);
  CHECK_THROWS_AS(partition_frames(run, {0.5, 0.0015, 0.5}), empty_register_error);
  try {
    partition_frames(run, {0.5, 0.5, 0.0015});
  } catch (const empty_register_error& e) {
    CHECK(std::string(e.what()).find("register A") != std::string::npos);
  }
}

TEST_CASE("the frame limit restricts partitioning to a prefix") {
  const AcquisitionRun run = seven();
  const Registers regs = partition_frames(run, {0.5, 0.0, 0.0}, 5);
  CHECK(regs.a == std::vector<std::uint64_t>{0, 1, 2});
  CHECK(regs.b == std::vector<std::uint64_t>{3, 4});
  CHECK_THROWS_AS(partition_frames(run, {0.5, 0.0, 0.0}, 8),
                  insufficient_frames_error);
}

TEST_CASE("balancing trims the weakest excursions from the larger register") {
  const AcquisitionRun run = seven();
  Registers regs = partition_frames(run, {0.5, 0.0015, 0.0015});
  REQUIRE(regs.a.size() == 2);
  REQUIRE(regs.b.size() == 3);

  const Registers bal = balance_registers(regs, run);
  CHECK(bal.a == std::vector<std::uint64_t>{0, 1});
  // |dT| of B was {2, 3, 4} * 1e-3 at frames {4, 5, 6}; frame 4 goes
  CHECK(bal.b == std::vector<std::uint64_t>{5, 6});
  CHECK(bal.balanced());
  CHECK(bal.k() == 2);

  // already balanced input is returned untouched
  const Registers again = balance_registers(bal, run);
  CHECK(again.a == bal.a);
  CHECK(again.b == bal.b);
}

TEST_CASE("balancing breaks excursion ties toward later frames") {
  // B excursions: frames 2,3 both at |dT| = 2e-3, frame 4 at 3e-3
  const AcquisitionRun run = run_with_T({0.503, 0.502, 0.498, 0.498, 0.497});
  Registers regs = partition_frames(run, {0.5, 0.0015, 0.0015});
  REQUIRE(regs.a == std::vector<std::uint64_t>{0, 1});
  REQUIRE(regs.b == std::vector<std::uint64_t>{2, 3, 4});

  const Registers bal = balance_registers(regs, run);
  CHECK(bal.b == std::vector<std::uint64_t>{2, 4});
}

TEST_CASE("balancing can trim register A too") {
  const AcquisitionRun run = run_with_T({0.503, 0.502, 0.501, 0.497});
  Registers regs = partition_frames(run, {0.5, 0.0, 0.0});
  REQUIRE(regs.a.size() == 3);
  REQUIRE(regs.b.size() == 1);
  const Registers bal = balance_registers(regs, run);
  CHECK(bal.a == std::vector<std::uint64_t>{0}); // +3e-3 is the strongest
  CHECK(bal.b == std::vector<std::uint64_t>{3});

  Registers empty;
  CHECK_THROWS_AS(balance_registers(empty, run), precondition_error);
}

TEST_CASE("count-driven thresholds land midway between order statistics") {
  const AcquisitionRun run = seven();
  const ThresholdPair thr = thresholds_for_count(run, 2, 0.5);
  CHECK(thr.t_mean_est == 0.5);
  CHECK(thr.t0_plus == Catch::Approx(1.5e-3));
  CHECK(thr.t0_minus == Catch::Approx(2.5e-3));

  const Registers regs = partition_frames(run, thr);
  CHECK(regs.a == std::vector<std::uint64_t>{0, 1});
  CHECK(regs.b == std::vector<std::uint64_t>{5, 6});
}

TEST_CASE("exhausting a side puts the cut halfway to zero") {
  const AcquisitionRun run = seven();
  const ThresholdPair thr = thresholds_for_count(run, 3, 0.5);
  CHECK(thr.t0_plus == Catch::Approx(0.5e-3));
  const Registers regs = partition_frames(run, thr);
  CHECK(regs.a == std::vector<std::uint64_t>{0, 1, 2});
  CHECK(regs.b.size() == 3);
}

TEST_CASE("infeasible counts name both side totals") {
  const AcquisitionRun run = seven();
  CHECK_THROWS_AS(thresholds_for_count(run, 4, 0.5), insufficient_frames_error);
  try {
    thresholds_for_count(run, 4, 0.5);
  } catch (const insufficient_frames_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("positive: 3") != std::string::npos);
    CHECK(msg.find("negative: 4") != std::string::npos);
  }
  CHECK_THROWS_AS(thresholds_for_count(run, 0, 0.5), precondition_error);
}

TEST_CASE("ties straddling the cut are rejected") {
  const AcquisitionRun run =
      run_with_T({0.503, 0.502, 0.502, 0.497, 0.496, 0.495});
  CHECK_THROWS_AS(thresholds_for_count(run, 2, 0.5), precondition_error);
  CHECK_NOTHROW(thresholds_for_count(run, 1, 0.5));
  // at k = 3 the tie sits wholly inside the selection, which is fine
  CHECK_NOTHROW(thresholds_for_count(run, 3, 0.5));
}

TEST_CASE("every feasible count is hit exactly") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t M = 40 + std::size_t(rng() % 160);
    std::vector<double> ts(M);
    for (double& t : ts)
      t = 0.5 + jitter(rng);
    const AcquisitionRun run = run_with_T(ts);

    std::size_t pos = 0, neg = 0;
    for (double t : ts)
      t > 0.5 ? ++pos : ++neg;
    const std::size_t k_max = std::min(pos, neg);
    REQUIRE(k_max >= 1);

    double prev_plus = 1e9, prev_minus = 1e9;
    for (std::size_t k = 1; k <= k_max; ++k) {
      const ThresholdPair thr = thresholds_for_count(run, k, 0.5);
      const Registers regs = partition_frames(run, thr);
      REQUIRE(regs.a.size() == k);
      REQUIRE(regs.b.size() == k);
      // growing the registers can only lower the cuts
      REQUIRE(thr.t0_plus <= prev_plus);
      REQUIRE(thr.t0_minus <= prev_minus);
      prev_plus = thr.t0_plus;
      prev_minus = thr.t0_minus;
      // indices ascend within each register
      REQUIRE(std::is_sorted(regs.a.begin(), regs.a.end()));
      REQUIRE(std::is_sorted(regs.b.begin(), regs.b.end()));
    }
  }
}
