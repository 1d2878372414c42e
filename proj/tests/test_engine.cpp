// test_engine.cpp

#include "qnb/engine.hpp"

#include <doctest.h>

#include <numeric>
#include <sstream>

using namespace qnb;

namespace {

SimConfig
path_config (int n, const std::string& policy, RateVector lambda, std::uint64_t horizon, std::uint64_t seed = 1)
{
  SimConfig c;
  c.graph = ConflictGraph::path (n);
  c.arrivals = ArrivalSpec::bernoulli (lambda, seed);
  c.policy = PolicySpec (policy);
  c.horizon = horizon;
  c.seed = seed;
  return c;
}

} // namespace

TEST_CASE ("no arrivals drain the system")
{
  auto c = path_config (3, "pi3_iq_tilde", {0.0, 0.0, 0.0}, 30);
  c.initial = {5, 5, 5};
  c.trace_slots = 30;
  c.warmup = 0;
  auto r = run (c);
  REQUIRE (r.trace.slots () == 30);
  CHECK (r.trace.q (0, 1) == 5);
  for (std::size_t t = 15; t < 30; ++t)
    for (int i = 0; i < 3; ++i)
      CHECK (r.trace.q (t, i) == 0);
}

TEST_CASE ("trace obeys the slot recursion")
{
  auto c = path_config (4, "pi4_tilde_1", {0.3, 0.3, 0.3, 0.3}, 5000, 4);
  c.trace_slots = 5000;
  auto r = run (c);
  const auto& tr = r.trace;
  for (std::size_t t = 0; t < tr.slots (); ++t)
    {
      OccupancyVector z (4);
      for (int i = 0; i < 4; ++i)
        z.set (i, tr.q (t, i) > 0);
      CHECK (tr.D[t] == served (tr.S[t], z));
      CHECK (is_activation_valid (c.graph, tr.S[t]));
      if (t + 1 < tr.slots ())
        for (int i = 0; i < 4; ++i)
          {
            std::int64_t arrived = tr.q (t + 1, i) - tr.q (t, i) + tr.D[t][i];
            CHECK ((arrived == 0 || arrived == 1));
          }
    }
}

TEST_CASE ("offered service to the last queue under top-down")
{
  auto r = run (path_config (3, "pi3_td", {0.2, 0.3, 0.2}, 1000000));
  CHECK (std::abs (r.metrics.offered_fraction[2] - 0.70) < 0.01);
  // Stable system: throughput equals the arrival rate.
  CHECK (r.metrics.departure_fraction[1] == doctest::Approx (0.3).epsilon (0.02));
  CHECK (stability_verdict (r.metrics) == Verdict::stable);
}

TEST_CASE ("random tie-break instability on four queues")
{
  auto r = run (path_config (4, "msm_random_tie", {0.47, 0.47, 0.47, 0.47}, 1000000));
  CHECK (r.metrics.queue_slopes[1] + r.metrics.queue_slopes[2] > 0.001);
}

TEST_CASE ("metrics bookkeeping")
{
  auto c = path_config (3, "pi3_iq_tilde", {0.3, 0.3, 0.3}, 20000);
  c.keep_series = true;
  auto r = run (c);
  const auto& m = r.metrics;
  CHECK (r.series.size () == 20000);
  CHECK (m.warmup == 2000);
  std::uint64_t counted = std::accumulate (m.histogram.begin (), m.histogram.end (), std::uint64_t{0});
  CHECK (counted == 18000);
  double mean = 0;
  for (std::size_t t = 2000; t < r.series.size (); ++t)
    mean += static_cast<double> (r.series[t]);
  CHECK (mean / 18000 == doctest::Approx (m.mean_sum_backlog));
  CHECK (std::accumulate (m.per_queue_mean.begin (), m.per_queue_mean.end (), 0.0) ==
         doctest::Approx (m.mean_sum_backlog));
  CHECK (*std::max_element (r.series.begin (), r.series.end ()) == m.max_sum_backlog);
}

TEST_CASE ("runs are reproducible and seeds matter")
{
  auto c = path_config (3, "rho3_gamma", {0.3, 0.3, 0.3}, 50000);
  c.policy = PolicySpec ("rho3_gamma", {{"gamma", 0.6}});
  auto a = run (c), b = run (c);
  CHECK (a.metrics.mean_sum_backlog == b.metrics.mean_sum_backlog);
  CHECK (a.metrics.histogram == b.metrics.histogram);
  c.seed = 2;
  CHECK (run (c).metrics.mean_sum_backlog != a.metrics.mean_sum_backlog);
}

TEST_CASE ("batch runs equal sequential runs")
{
  std::vector<SimConfig> cs;
  for (std::uint64_t s = 1; s <= 4; ++s)
    cs.push_back (path_config (3, "pi3_td", {0.3, 0.4, 0.3}, 20000, s));
  auto batch = run_batch (cs);
  for (std::size_t k = 0; k < cs.size (); ++k)
    CHECK (batch[k].metrics.mean_sum_backlog == run (cs[k]).metrics.mean_sum_backlog);
  CHECK (worker_threads () >= 1);
}

TEST_CASE ("coupled comparison")
{
  auto base = path_config (3, "pi3_td", at_load (ConflictGraph::path (3), {0.25, 0.74, 0.25}, 0.9), 200000);
  auto same = coupled_compare ({PolicySpec ("pi3_td"), PolicySpec ("pi3_td")}, base);
  CHECK (same.series[0] == same.series[1]);
  auto cmp = coupled_compare ({PolicySpec ("pi3_iq_tilde"), PolicySpec ("pi3_td")}, base);
  CHECK (cmp.labels[0] == "pi3_iq_tilde");
  CHECK (cmp.metrics[0].mean_sum_backlog <= cmp.metrics[1].mean_sum_backlog);
}

TEST_CASE ("property P on traces")
{
  SUBCASE ("inner-priority rule never violates it")
  {
    auto c = path_config (3, "pi3_iq_tilde", {0.3, 0.45, 0.3}, 100000);
    c.trace_slots = 100000;
    c.monitors.property_P = true;
    auto r = run (c);
    CHECK (check_property_P (r.trace, c.graph).empty ());
    CHECK (r.metrics.property_P_violations == 0);
  }
  SUBCASE ("outer priority violates it on 110")
  {
    auto c = path_config (3, "pi3_oq", {0.0, 0.0, 0.0}, 3);
    c.initial = {1, 1, 0};
    c.trace_slots = 3;
    c.warmup = 0;
    auto r = run (c);
    CHECK (r.trace.S[0].to_string () == "101");
    CHECK (r.trace.D[0].to_string () == "100");
    auto v = check_property_P (r.trace, c.graph);
    REQUIRE (v.size () == 1);
    CHECK (v[0].slot == 0);
    CHECK (v[0].a == 1);
    CHECK (v[0].b == 2);
    // The following 010 slot serves queue 2 and is clean.
    CHECK (r.trace.D[1].to_string () == "010");
  }
  SUBCASE ("direct pair counting")
  {
    auto g = ConflictGraph::path (3);
    std::vector<std::int64_t> q{1, 1, 0};
    CHECK (property_P_violations (g, q, 0b001) == 1);
    CHECK (property_P_violations (g, q, 0b010) == 0);
    CHECK (property_P_violations (g, q, 0b000) == 2);
    auto soc = ConflictGraph::star_of_cliques ({1, 1, 1});
    std::vector<std::int64_t> r{0, 2, 0};
    CHECK (property_P_violations (soc, r, 0b010) == 0);
    CHECK (property_P_violations (soc, r, 0b000) == 1);
  }
}

TEST_CASE ("MSM monitor flags the non-MSM inner rule")
{
  auto c = path_config (3, "pi3_iq", {0.3, 0.3, 0.3}, 50000);
  c.monitors.msm = true;
  CHECK (run (c).metrics.msm_violations > 0);
  c.policy = PolicySpec ("pi3_iq_tilde");
  CHECK (run (c).metrics.msm_violations == 0);
}

TEST_CASE ("stability verdicts")
{
  CHECK (stability_verdict (run (path_config (3, "pi3_td", {0.2, 0.3, 0.2}, 200000)).metrics) == Verdict::stable);
  CHECK (stability_verdict (run (path_config (3, "pi3_oq", {0.2, 0.75, 0.2}, 1000000)).metrics) ==
         Verdict::unstable);
  auto c = path_config (3, "rho3_gamma", RateVector ({0.5, 0.5, 0.5}).scaled (0.99), 1000000);
  c.policy = PolicySpec ("rho3_gamma", {{"gamma", 0.3}});
  CHECK (stability_verdict (run (c).metrics) == Verdict::unstable);

  Metrics m;
  m.growth_slope = 5e-3;
  m.late_growth_slope = 5e-3;
  CHECK (stability_verdict (m) == Verdict::inconclusive);
  m.growth_slope = m.late_growth_slope = 0.05;
  CHECK (stability_verdict (m) == Verdict::unstable);
  m.growth_slope = m.late_growth_slope = 0.0;
  m.max_sum_backlog = 20000;
  CHECK (stability_verdict (m) == Verdict::inconclusive);
  CHECK (to_string (Verdict::stable) == "stable");
}

TEST_CASE ("configuration errors")
{
  auto c = path_config (3, "pi3_td", {0.2, 0.2, 0.2}, 100);
  c.warmup = 100;
  CHECK_THROWS_AS (run (c), ConfigError);
  c = path_config (3, "pi4_td", {0.2, 0.2, 0.2}, 100);
  CHECK_THROWS_AS (run (c), ConfigError);
  c = path_config (3, "pi3_td", {0.2, 0.2, 0.2}, 100);
  c.initial = {1, 2};
  CHECK_THROWS_AS (run (c), DimensionError);
}

TEST_CASE ("trace CSV")
{
  auto c = path_config (2, "piN_td", {0.5, 0.5}, 10);
  c.trace_slots = 3;
  auto r = run (c);
  std::ostringstream os;
  write_trace_csv (r.trace, os);
  std::istringstream is (os.str ());
  std::string header, line;
  std::getline (is, header);
  CHECK (header == "slot,Q_1,Q_2,S_1,S_2,D_1,D_2");
  int rows = 0;
  while (std::getline (is, line))
    ++rows;
  CHECK (rows == 3);
}

TEST_CASE ("clique networks run end to end")
{
  SimConfig c;
  c.graph = ConflictGraph::star_of_cliques ({1, 2, 2});
  c.arrivals = ArrivalSpec::bernoulli ({0.3, 0.2, 0.2, 0.2, 0.2}, 1);
  c.horizon = 100000;
  c.monitors.property_P = true;
  for (const char* name : {"phi_ic", "phi_ic_tilde"})
    {
      c.policy = PolicySpec (name);
      auto r = run (c);
      CHECK (r.metrics.property_P_violations == 0);
      CHECK (stability_verdict (r.metrics) == Verdict::stable);
    }
}
