#include <gtest/gtest.h>

#include <vector>

#include "mtjrng/error.hpp"
#include "mtjrng/sweep.hpp"
#include "test_support.hpp"

using namespace mtjrng;

namespace {

std::vector<double> nm(std::initializer_list<double> v) {
  std::vector<double> out;
  for (double x : v) out.push_back(x * 1e-9);
  return out;
}

}  // namespace

TEST(WriteDelays, ShippedModelNearTargets) {
  const WriteDelays d = measure_write_delays(test::shipped_model());
  EXPECT_NEAR(d.ap_to_p, 3.5e-9, 0.2 * 3.5e-9);
  EXPECT_NEAR(d.p_to_ap, 3.0e-9, 0.2 * 3.0e-9);
  EXPECT_GT(d.ap_to_p, d.p_to_ap);
  EXPECT_LE(d.max_newton_iterations, 20);
  EXPECT_LE(d.max_kcl_residual, 1e-12);
  EXPECT_GT(d.energy_ap_to_p, 0.0);
  EXPECT_GT(d.energy_p_to_ap, 0.0);
}

TEST(Sweep, GateLengthTrends) {
  const auto values = nm({14, 16, 18, 20, 24});
  const SweepResult r = sweep(test::shipped_model(), SweepParam::kLg, values);
  ASSERT_EQ(r.rows.size(), values.size());
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    ASSERT_TRUE(r.rows[i].delays) << r.rows[i].error;
    EXPECT_GT(r.rows[i].delays->ap_to_p, 0.0);
    EXPECT_GT(r.rows[i].delays->p_to_ap, 0.0);
    if (i == 0) continue;
    EXPECT_GE(r.rows[i].delays->ap_to_p, r.rows[i - 1].delays->ap_to_p);
    EXPECT_GE(r.rows[i].delays->p_to_ap, r.rows[i - 1].delays->p_to_ap);
    EXPECT_GT(r.rows[i].figures.ratio, r.rows[i - 1].figures.ratio);
  }
}

TEST(Sweep, FinThicknessTrend) {
  const auto values = nm({6, 8, 10, 12});
  const SweepResult r = sweep(test::shipped_model(), SweepParam::kTfin, values);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    ASSERT_TRUE(r.rows[i].delays && r.rows[i - 1].delays);
    EXPECT_LE(r.rows[i].delays->ap_to_p, r.rows[i - 1].delays->ap_to_p);
    EXPECT_LE(r.rows[i].delays->p_to_ap, r.rows[i - 1].delays->p_to_ap);
  }
}

TEST(Sweep, RepeatIsIdenticalAcrossThreadCounts) {
  const auto values = nm({14, 20, 24});
  const SweepResult a = sweep(test::shipped_model(), SweepParam::kLg, values, 1);
  const SweepResult b = sweep(test::shipped_model(), SweepParam::kLg, values, 3);
  for (std::size_t i = 0; i < values.size(); ++i) {
    EXPECT_EQ(a.rows[i].delays->ap_to_p, b.rows[i].delays->ap_to_p);
    EXPECT_EQ(a.rows[i].delays->p_to_ap, b.rows[i].delays->p_to_ap);
    EXPECT_EQ(a.rows[i].energy_per_write(), b.rows[i].energy_per_write());
    EXPECT_EQ(a.rows[i].figures.ratio, b.rows[i].figures.ratio);
  }
}

TEST(Sweep, FailingPointRecordedAndSweepContinues) {
  const SweepResult r =
      sweep(test::shipped_model(), SweepParam::kLg, nm({14, 20, 5000}));
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_TRUE(r.rows[0].delays);
  EXPECT_TRUE(r.rows[1].delays);
  EXPECT_FALSE(r.rows[2].delays);
  EXPECT_FALSE(r.rows[2].error.empty());
  EXPECT_EQ(r.rows[2].energy_per_write(), 0.0);
}

TEST(Sweep, RejectsShortOrUnsortedGrid) {
  EXPECT_THROW(sweep(test::shipped_model(), SweepParam::kLg, nm({14, 20})),
               ConfigError);
  EXPECT_THROW(sweep(test::shipped_model(), SweepParam::kLg, nm({14, 24, 20})),
               ConfigError);
  EXPECT_THROW(parse_sweep_param("hfin"), ConfigError);
  EXPECT_EQ(parse_sweep_param("tfin"), SweepParam::kTfin);
}

TEST(Sweep, WithGeometryTouchesEveryFinFetCard) {
  const ModelConfig m = with_geometry(test::shipped_model(), SweepParam::kTfin, 7e-9);
  for (const auto& dev : m.write_netlist.devices) {
    if (const auto* fet = std::get_if<FinFetElement>(&dev)) {
      EXPECT_DOUBLE_EQ(m.write_netlist.finfet_params(*fet).t_fin, 7e-9);
    }
  }
}
