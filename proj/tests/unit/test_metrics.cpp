#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "duotrack/errors.hpp"
#include "duotrack/metrics.hpp"

using namespace duotrack;

namespace {

// Run built from overlaps: values >= 0 are Tracked, -1 Init, -2 Failed, -3 Skipped.
FrameOverlaps run_of(std::initializer_list<double> codes) {
  FrameOverlaps r;
  for (double c : codes) {
    if (c >= 0) {
      r.status.push_back(FrameStatus::tracked);
      r.overlap.emplace_back(c);
    } else if (c == -1) {
      r.status.push_back(FrameStatus::init);
      r.overlap.emplace_back(std::nullopt);
    } else if (c == -2) {
      r.status.push_back(FrameStatus::failed);
      r.overlap.emplace_back(0.0);
    } else {
      r.status.push_back(FrameStatus::skipped);
      r.overlap.emplace_back(std::nullopt);
    }
  }
  return r;
}

constexpr double I = -1, F = -2, S = -3;

EvalConfig burn(int b) {
  EvalConfig c;
  c.burn_in = b;
  return c;
}

// Zero-extend every curve to hi, then average prefix means.
double eao_oracle(const std::vector<std::vector<double>>& runs, int lo, int hi) {
  double total = 0.0;
  for (int n = lo; n <= hi; ++n) {
    double acc = 0.0;
    for (auto c : runs) {
      c.resize(std::max<std::size_t>(c.size(), static_cast<std::size_t>(hi)), 0.0);
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += c[k];
      acc += s / n;
    }
    total += acc / runs.size();
  }
  return total / (hi - lo + 1);
}

Polygon unit_box(double x) { return axis_to_polygon({x, 0, x + 1, 1}); }

}  // namespace

TEST(FrameOverlaps, StatusMapping) {
  RunTrace t{"s", {FrameRecord::make_init(), FrameRecord::make_tracked(unit_box(0)),
                   FrameRecord::make_tracked(unit_box(0.5)), FrameRecord::make_failed(),
                   FrameRecord::make_skipped()}};
  const std::vector<Polygon> gt(5, unit_box(0));
  const FrameOverlaps o = frame_overlaps(t, gt);
  ASSERT_EQ(o.size(), 5u);
  EXPECT_FALSE(o.overlap[0].has_value());
  EXPECT_DOUBLE_EQ(*o.overlap[1], 1.0);
  EXPECT_DOUBLE_EQ(*o.overlap[2], 1.0 / 3.0);
  EXPECT_EQ(*o.overlap[3], 0.0);
  EXPECT_FALSE(o.overlap[4].has_value());
  EXPECT_THROW(frame_overlaps(t, std::vector<Polygon>(4, unit_box(0))), ArgumentError);
}

TEST(Accuracy, Examples) {
  const std::vector<FrameOverlaps> one{run_of({I, 0.8, 0.6, 0.4})};
  EXPECT_NEAR(accuracy(one, burn(0)), 0.6, 1e-15);
  EXPECT_THROW(accuracy(one, burn(3)), ArgumentError);
  EXPECT_THROW(accuracy(one, burn(10)), ArgumentError);
  EXPECT_NEAR(accuracy(one, burn(2)), 0.4, 1e-15);

  const std::vector<FrameOverlaps> two{run_of({I, 0.5, 0.5}), run_of({I, 0.7, 0.7})};
  EXPECT_NEAR(accuracy(two, burn(0)), 0.6, 1e-15);
}

TEST(Accuracy, BurnInRestartsAfterEveryInit) {
  const std::vector<FrameOverlaps> r{run_of({I, 0.1, 0.9, F, S, I, 0.2, 0.5, 0.7})};
  // Burn-in 1 drops 0.1 and 0.2.
  EXPECT_NEAR(accuracy(r, burn(1)), (0.9 + 0.5 + 0.7) / 3.0, 1e-15);
}

TEST(Robustness, Examples) {
  const std::vector<FrameOverlaps> none{run_of({I, 0.5, 0.5})};
  EXPECT_EQ(robustness(none).failures, 0u);
  EXPECT_EQ(robustness(none).per_frame, 0.0);

  FrameOverlaps hundred = run_of({I, F});
  for (int i = 0; i < 98; ++i) {
    hundred.status.push_back(FrameStatus::tracked);
    hundred.overlap.emplace_back(0.5);
  }
  const std::vector<FrameOverlaps> h{hundred};
  EXPECT_EQ(robustness(h).failures, 1u);
  EXPECT_DOUBLE_EQ(robustness(h).per_frame, 0.01);
}

TEST(Robustness, FailureCountsAreAdditive) {
  std::mt19937_64 rng(1);
  std::bernoulli_distribution fail(0.1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<FrameOverlaps> a, b;
    for (int k = 0; k < 3; ++k) {
      FrameOverlaps r = run_of({I});
      for (int i = 0; i < 30; ++i) {
        r.status.push_back(fail(rng) ? FrameStatus::failed : FrameStatus::tracked);
        r.overlap.emplace_back(0.3);
      }
      (k < 2 ? a : b).push_back(r);
    }
    std::vector<FrameOverlaps> all = a;
    all.insert(all.end(), b.begin(), b.end());
    EXPECT_EQ(robustness(all).failures, robustness(a).failures + robustness(b).failures);
  }
}

TEST(Eao, Examples) {
  const std::vector<std::vector<double>> flat{{1, 1, 1, 1}};
  EXPECT_DOUBLE_EQ(expected_average_overlap(flat, 2, 4), 1.0);
  const std::vector<std::vector<double>> short_run{{1, 0.5}};
  EXPECT_DOUBLE_EQ(expected_average_overlap(short_run, 4, 4), 0.375);
  EXPECT_THROW(expected_average_overlap(std::vector<std::vector<double>>{}, 1, 2), ArgumentError);
  EXPECT_THROW(expected_average_overlap(flat, 3, 2), ArgumentError);
}

TEST(Eao, SubrunsSplitAtFailures) {
  const FrameOverlaps r = run_of({I, 0.9, 0.8, F, S, S, I, 0.5, 0.4, I});
  const auto subs = eao_subruns(r);
  ASSERT_EQ(subs.size(), 3u);
  EXPECT_EQ(subs[0], (std::vector<double>{0.9, 0.8, 0.0}));
  EXPECT_EQ(subs[1], (std::vector<double>{0.5, 0.4}));
  EXPECT_TRUE(subs[2].empty());
}

TEST(Eao, MatchesZeroExtensionOracle) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> len(0, 12), lo_d(1, 8), span(0, 8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<double>> runs(1 + trial % 5);
    for (auto& r : runs) {
      r.resize(len(rng));
      for (double& v : r) v = u(rng);
    }
    const int lo = lo_d(rng), hi = lo + span(rng);
    EXPECT_NEAR(expected_average_overlap(runs, lo, hi), eao_oracle(runs, lo, hi), 1e-12);
  }
}

TEST(Eao, BoundedByLargestOverlap) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> runs(3, std::vector<double>(10));
    double mx = 0.0;
    for (auto& r : runs)
      for (double& v : r) mx = std::max(mx, v = u(rng));
    EXPECT_LE(expected_average_overlap(runs, 2, 15), mx);
  }
}

TEST(Eao, DefaultIntervalFromMedianLength) {
  EXPECT_EQ(default_eao_interval(std::vector<std::size_t>{12}), (std::pair{6, 18}));
  EXPECT_EQ(default_eao_interval(std::vector<std::size_t>{10, 100, 11}), (std::pair{5, 17}));
  EXPECT_EQ(default_eao_interval(std::vector<std::size_t>{3, 4}), (std::pair{1, 6}));
  EXPECT_EQ(default_eao_interval(std::vector<std::size_t>{1}), (std::pair{1, 2}));
  EXPECT_THROW(default_eao_interval(std::vector<std::size_t>{}), ArgumentError);
}

TEST(GotMetrics, Examples) {
  const FrameOverlaps r = run_of({I, 1.0, 0.6, 0.2});
  EXPECT_NEAR(average_overlap(r), 0.6, 1e-15);
  EXPECT_DOUBLE_EQ(success_rate(r, 0.5), 2.0 / 3.0);
  EXPECT_EQ(average_overlap(run_of({I, 1, 1, 1})), 1.0);
  EXPECT_EQ(average_overlap(run_of({I, 0, 0})), 0.0);
  EXPECT_EQ(success_rate(run_of({I, 0.5, 0.5}), 0.5), 0.0);
  EXPECT_EQ(success_rate(run_of({I, 0.1, 0.01, 1.0}), 0.0), 1.0);
  EXPECT_THROW(average_overlap(run_of({I})), ArgumentError);
}

TEST(GotMetrics, SuccessRateNonIncreasingInTau) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    FrameOverlaps r = run_of({I});
    for (int i = 0; i < 40; ++i) {
      r.status.push_back(FrameStatus::tracked);
      r.overlap.emplace_back(u(rng));
    }
    double prev = 1.0;
    for (double tau = 0.0; tau <= 1.0; tau += 0.02) {
      const double sr = success_rate(r, tau);
      EXPECT_LE(sr, prev);
      prev = sr;
    }
  }
}

TEST(Metrics, ConstantOverlapGivesThatValueEverywhere) {
  for (double v : {0.25, 0.5, 0.8125}) {
    FrameOverlaps r = run_of({I});
    for (int i = 0; i < 20; ++i) {
      r.status.push_back(FrameStatus::tracked);
      r.overlap.emplace_back(v);
    }
    const std::vector<FrameOverlaps> runs{r};
    EXPECT_DOUBLE_EQ(accuracy(runs, burn(3)), v);
    EXPECT_DOUBLE_EQ(eao(runs, {5, 15}), v);
    EXPECT_DOUBLE_EQ(average_overlap(r), v);
  }
}

TEST(Metrics, ScoresAreDeterministic) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<FrameOverlaps> runs;
  for (int k = 0; k < 4; ++k) {
    FrameOverlaps r = run_of({I});
    for (int i = 0; i < 25; ++i) {
      r.status.push_back(FrameStatus::tracked);
      r.overlap.emplace_back(u(rng));
    }
    runs.push_back(r);
  }
  const EvalConfig cfg = burn(2);
  const VotScores a = vot_scores(runs, cfg), b = vot_scores(runs, cfg);
  EXPECT_EQ(a.accuracy, b.accuracy);
  EXPECT_EQ(a.eao, b.eao);
  const GotScores g1 = got_scores(runs, cfg), g2 = got_scores(runs, cfg);
  EXPECT_EQ(g1.ao, g2.ao);
  EXPECT_EQ(g1.sr, g2.sr);
  std::ostringstream r1, r2;
  write_report(r1, a, cfg, runs.size());
  write_report(r2, b, cfg, runs.size());
  EXPECT_EQ(r1.str(), r2.str());
  EXPECT_NE(r1.str().find("eao="), std::string::npos);
}

TEST(EvalConfig, Validation) {
  EvalConfig c;
  EXPECT_NO_THROW(c.validate());
  c.burn_in = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = EvalConfig{};
  c.eao_interval = std::pair{5, 4};
  EXPECT_THROW(c.validate(), ConfigError);
  c = EvalConfig{};
  c.sr_thresholds = {1.5};
  EXPECT_THROW(c.validate(), ConfigError);
}
