#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "tempograph/session_fit.hpp"

using namespace tempograph;

namespace {

std::vector<double> bimodal_gaps(std::uint64_t seed, std::size_t n, double m1 = 1.0, double m2 = 5.0,
                                 double sd = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> a(m1, sd), b(m2, sd);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> gaps(n);
  for (auto& g : gaps) g = std::pow(10.0, coin(rng) ? a(rng) : b(rng));
  return gaps;
}

ErrorCode code_of(const std::vector<double>& gaps) {
  try {
    fit_session_gaps(gaps);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::Io;
}

}  // namespace

TEST(SessionFit, RecoversBimodalMixture) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto fit = fit_session_gaps(bimodal_gaps(seed, 4000));
    EXPECT_NEAR(fit.short_gap.mean, 1.0, 0.1);
    EXPECT_NEAR(fit.long_gap.mean, 5.0, 0.1);
    EXPECT_NEAR(fit.short_gap.weight, 0.5, 0.05);
    EXPECT_GE(fit.threshold_log10, 2.5);
    EXPECT_LE(fit.threshold_log10, 3.5);
    EXPECT_NEAR(fit.threshold, std::pow(10.0, fit.threshold_log10), 1e-9 * fit.threshold);
    EXPECT_EQ(fit.num_gaps, 4000);
  }
}

TEST(SessionFit, HistogramHasUnitArea) {
  const auto fit = fit_session_gaps(bimodal_gaps(7, 1000), 40);
  const double width = fit.bin_centers[1] - fit.bin_centers[0];
  EXPECT_NEAR(fit.density.sum() * width, 1.0, 1e-12);
}

TEST(SessionFit, ThresholdIsAComponentCrossing) {
  const auto fit = fit_session_gaps(bimodal_gaps(8, 3000, 0.0, 3.0, 0.4));
  EXPECT_NEAR(fit.short_gap.density(fit.threshold_log10), fit.long_gap.density(fit.threshold_log10), 1e-9);
  EXPECT_GT(fit.threshold_log10, fit.short_gap.mean);
  EXPECT_LT(fit.threshold_log10, fit.long_gap.mean);
}

TEST(SessionFit, SingleModeSignalled) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(3.0, 0.3);
  std::vector<double> gaps(4000);
  for (auto& g : gaps) g = std::pow(10.0, n(rng));
  EXPECT_EQ(code_of(gaps), ErrorCode::SingleMode);
}

TEST(SessionFit, EqualGapsSignalled) {
  EXPECT_EQ(code_of(std::vector<double>(100, 60.0)), ErrorCode::SingleMode);
}

TEST(SessionFit, SparseHistogramSignalled) {
  std::vector<double> gaps;
  for (int i = 0; i < 50; ++i) gaps.push_back(i % 2 ? 10.0 : 1e5);
  gaps.push_back(1e3);
  EXPECT_EQ(code_of(gaps), ErrorCode::InsufficientData);
  EXPECT_EQ(code_of({0.0, 0.0}), ErrorCode::InsufficientData);
}

TEST(PairGaps, ConsecutiveSamePair) {
  EventStream s;
  s.num_nodes = 3;
  s.events = {{0, 1, 1.0, 0}, {0, 2, 2.0, 1}, {0, 1, 4.0, 2}, {1, 0, 5.0, 3}, {0, 1, 10.0, 4}};
  auto gaps = pair_gaps(build_tcsr(s));
  std::sort(gaps.begin(), gaps.end());
  EXPECT_EQ(gaps, (std::vector<double>{3.0, 6.0}));
}

TEST(PairGaps, GraphLevelFit) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> a(1.0, 0.3), b(5.0, 0.3);
  std::bernoulli_distribution coin(0.5);
  EventStream s;
  s.num_nodes = 40;
  EdgeId id = 0;
  for (NodeId u = 0; u < 20; ++u) {
    double t = 0.0;
    for (int k = 0; k < 100; ++k) {
      s.events.push_back({u, u + 20, t, id++});
      t += std::pow(10.0, coin(rng) ? a(rng) : b(rng));
    }
  }
  const auto fit = session_fit(build_tcsr(s));
  EXPECT_NEAR(fit.short_gap.mean, 1.0, 0.1);
  EXPECT_NEAR(fit.long_gap.mean, 5.0, 0.1);
}
