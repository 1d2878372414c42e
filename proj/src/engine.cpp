// engine.cpp

#include "qnb/engine.hpp"

#include "qnb/matching.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

namespace qnb {

namespace {

constexpr std::size_t kHistogramBins = 1 << 16;

// Running sums for a least-squares slope of y against t.
struct SlopeFit
{
  double n = 0, st = 0, sy = 0, stt = 0, sty = 0;

  void add (double t, double y)
  {
    n += 1;
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }

  double slope () const
  {
    double den = n * stt - st * st;
    return den > 0 ? (n * sty - st * sy) / den : 0.0;
  }
};

bool
valid_mask (const ConflictGraph& g, std::uint64_t s)
{
  for (std::uint64_t m = s; m; m &= m - 1)
    if (g.neighbors (std::countr_zero (m)) & s)
      return false;
  return true;
}

std::int64_t
total_in (std::span<const std::int64_t> q, const ConflictGraph& g, int c)
{
  std::int64_t t = 0;
  for (int i = g.clique_begin (c); i < g.clique_begin (c) + g.clique_size (c); ++i)
    t += q[static_cast<std::size_t> (i)];
  return t;
}

template <class F>
void
for_each_pair (const ConflictGraph& g, F&& f)
{
  switch (g.kind ())
    {
    case GraphKind::clique:
      f (0, 0);
      break;
    case GraphKind::star_of_cliques:
      for (int c = 1; c < g.num_cliques (); ++c)
        f (0, c);
      break;
    case GraphKind::path:
    case GraphKind::linear_array_of_cliques:
      for (int c = 0; c + 1 < g.num_cliques (); ++c)
        f (c, c + 1);
      break;
    }
}

} // namespace

std::uint64_t
SimConfig::effective_warmup () const
{
  return warmup < 0 ? horizon / 10 : static_cast<std::uint64_t> (warmup);
}

void
SimConfig::validate () const
{
  if (horizon == 0 || effective_warmup () >= horizon)
    throw ConfigError ("horizon must exceed warmup");
  if (arrivals.size () != graph.total_queues ())
    throw DimensionError ("arrival spec has " + std::to_string (arrivals.size ()) + " queues, graph has " +
                          std::to_string (graph.total_queues ()));
  if (!initial.empty () && static_cast<int> (initial.size ()) != graph.total_queues ())
    throw DimensionError ("initial backlog length does not match graph");
  for (auto x : initial)
    if (x < 0)
      throw ConfigError ("initial backlog must be non-negative");
  arrivals.validate ();
}

int
property_P_violations (const ConflictGraph& g, std::span<const std::int64_t> q, std::uint64_t departures)
{
  int bad = 0;
  for_each_pair (g, [&] (int a, int b) {
    std::uint64_t m = g.clique_mask (a) | g.clique_mask (b);
    bool empty = total_in (q, g, a) + (a == b ? 0 : total_in (q, g, b)) == 0;
    bool idle = (departures & m) == 0;
    if (empty != idle)
      ++bad;
  });
  return bad;
}

std::vector<PropertyViolation>
check_property_P (const SimTrace& trace, const ConflictGraph& g)
{
  if (trace.n != g.total_queues ())
    throw DimensionError ("trace does not match graph");
  std::vector<PropertyViolation> out;
  for (std::size_t t = 0; t < trace.slots (); ++t)
    {
      std::span<const std::int64_t> q (trace.Q.data () + t * static_cast<std::size_t> (trace.n),
                                       static_cast<std::size_t> (trace.n));
      std::uint64_t d = trace.D[t].mask ();
      for_each_pair (g, [&] (int a, int b) {
        std::uint64_t m = g.clique_mask (a) | g.clique_mask (b);
        bool empty = total_in (q, g, a) + (a == b ? 0 : total_in (q, g, b)) == 0;
        if (empty != ((d & m) == 0))
          out.push_back ({t, a, b});
      });
    }
  return out;
}

SimResult
run (const SimConfig& cfg)
{
  cfg.validate ();
  const ConflictGraph& g = cfg.graph;
  const int n = g.total_queues ();
  const auto un = static_cast<std::size_t> (n);
  const std::uint64_t warm = cfg.effective_warmup ();
  const std::uint64_t H = cfg.horizon;

  auto policy = make_policy (cfg.policy, g);
  policy->reset ();
  ArrivalStream arrivals (cfg.arrivals.with_seed (cfg.seed));
  Rng prng (cfg.seed, kPolicyStream);

  std::vector<std::int64_t> Q (un, 0);
  if (!cfg.initial.empty ())
    Q = cfg.initial;
  std::vector<std::uint8_t> a;
  arrivals.next (a);
  for (std::size_t i = 0; i < un; ++i)
    Q[i] += a[i];

  // Deterministic occupancy rules are tabulated once.
  std::vector<std::uint64_t> table;
  if (policy->info_class () == InfoClass::occupancy_only && policy->is_stateless () && n <= 16)
    {
      std::vector<std::int64_t> ones (un);
      for (std::uint64_t z = 0; z < (std::uint64_t{1} << n); ++z)
        {
          for (std::size_t i = 0; i < un; ++i)
            ones[i] = (z >> i) & 1u;
          Observation obs{ones, OccupancyVector (n, z), 0};
          table.push_back (policy->decide (obs, prng).mask ());
        }
    }

  SimResult res;
  Metrics& m = res.metrics;
  m.slots = H;
  m.warmup = warm;
  m.eps_s = cfg.eps_s;
  m.bound_s = cfg.bound_s;
  std::vector<double> qsum (un, 0.0);
  std::vector<std::uint64_t> offered (un, 0), departed (un, 0);
  std::vector<SlopeFit> qfit (un);
  SlopeFit fit, late;
  double sum_total = 0.0;
  m.histogram.assign (kHistogramBins, 0);
  if (cfg.keep_series)
    res.series.reserve (H);
  res.trace.n = n;
  const std::uint64_t half = H / 2;
  const std::uint64_t quarter = H - H / 4;

  for (std::uint64_t t = 0; t < H; ++t)
    {
      std::uint64_t z = 0;
      std::int64_t total = 0;
      for (std::size_t i = 0; i < un; ++i)
        {
          if (Q[i] > 0)
            z |= std::uint64_t{1} << i;
          total += Q[i];
        }

      std::uint64_t s;
      if (!table.empty ())
        s = table[z];
      else
        {
          Observation obs{Q, OccupancyVector (n, z), t};
          ActivationVector sv = policy->decide (obs, prng);
          if (sv.size () != n)
            throw ContractError ("slot " + std::to_string (t) + ": activation has wrong length");
          s = sv.mask ();
        }
      if (cfg.monitors.activation_valid && !valid_mask (g, s))
        throw ContractError ("slot " + std::to_string (t) + ": policy " + policy->name () + " emitted invalid activation " +
                             ActivationVector (n, s).to_string ());
      std::uint64_t d = s & z;

      if (cfg.monitors.property_P)
        m.property_P_violations += static_cast<std::uint64_t> (property_P_violations (g, Q, d));
      if (cfg.monitors.msm && std::popcount (d) != max_independent_nonempty (g, OccupancyVector (n, z)))
        ++m.msm_violations;
      if (t < cfg.trace_slots)
        {
          res.trace.Q.insert (res.trace.Q.end (), Q.begin (), Q.end ());
          res.trace.S.emplace_back (n, s);
          res.trace.D.emplace_back (n, d);
        }
      if (cfg.keep_series)
        res.series.push_back (total);

      m.max_sum_backlog = std::max (m.max_sum_backlog, total);
      if (t >= warm)
        {
          sum_total += static_cast<double> (total);
          for (std::size_t i = 0; i < un; ++i)
            {
              qsum[i] += static_cast<double> (Q[i]);
              offered[i] += (s >> i) & 1u;
              departed[i] += (d >> i) & 1u;
            }
          ++m.histogram[std::min (static_cast<std::size_t> (total), kHistogramBins - 1)];
        }
      if (t >= half)
        {
          auto td = static_cast<double> (t);
          fit.add (td, static_cast<double> (total));
          for (std::size_t i = 0; i < un; ++i)
            qfit[i].add (td, static_cast<double> (Q[i]));
          if (t >= quarter)
            late.add (td, static_cast<double> (total));
        }

      for (std::size_t i = 0; i < un; ++i)
        Q[i] -= (d >> i) & 1u;
      arrivals.next (a);
      for (std::size_t i = 0; i < un; ++i)
        Q[i] += a[i];
    }

  auto avg_n = static_cast<double> (H - warm);
  m.mean_sum_backlog = sum_total / avg_n;
  for (std::size_t i = 0; i < un; ++i)
    {
      m.per_queue_mean.push_back (qsum[i] / avg_n);
      m.offered_fraction.push_back (static_cast<double> (offered[i]) / avg_n);
      m.departure_fraction.push_back (static_cast<double> (departed[i]) / avg_n);
      m.queue_slopes.push_back (qfit[i].slope ());
    }
  m.growth_slope = fit.slope ();
  m.late_growth_slope = late.slope ();
  // Trim the histogram to its populated range.
  while (m.histogram.size () > 1 && m.histogram.back () == 0)
    m.histogram.pop_back ();
  return res;
}

unsigned
worker_threads ()
{
  unsigned hw = std::max (1u, std::thread::hardware_concurrency ());
  if (const char* env = std::getenv ("QNB_THREADS"))
    {
      int cap = std::atoi (env);
      if (cap > 0)
        hw = std::min (hw, static_cast<unsigned> (cap));
    }
  return hw;
}

std::vector<SimResult>
run_batch (const std::vector<SimConfig>& configs)
{
  std::vector<SimResult> out (configs.size ());
  unsigned k = std::min<unsigned> (worker_threads (), static_cast<unsigned> (configs.size ()));
  if (k <= 1)
    {
      for (std::size_t i = 0; i < configs.size (); ++i)
        out[i] = run (configs[i]);
      return out;
    }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < configs.size ();)
      {
        try
          {
            out[i] = run (configs[i]);
          }
        catch (...)
          {
            std::lock_guard<std::mutex> lock (mu);
            if (!err)
              err = std::current_exception ();
          }
      }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < k; ++w)
    pool.emplace_back (worker);
  for (auto& th : pool)
    th.join ();
  if (err)
    std::rethrow_exception (err);
  return out;
}

std::string
to_string (Verdict v)
{
  switch (v)
    {
    case Verdict::stable:
      return "stable";
    case Verdict::unstable:
      return "unstable";
    case Verdict::inconclusive:
      return "inconclusive";
    }
  return "?";
}

Verdict
stability_verdict (const Metrics& m)
{
  if (m.growth_slope < m.eps_s && static_cast<double> (m.max_sum_backlog) < m.bound_s)
    return Verdict::stable;
  if (m.growth_slope > 10 * m.eps_s && m.late_growth_slope > 10 * m.eps_s)
    return Verdict::unstable;
  return Verdict::inconclusive;
}

CoupledResult
coupled_compare (const std::vector<PolicySpec>& policies, const SimConfig& base)
{
  std::vector<SimConfig> cfgs;
  CoupledResult out;
  for (const auto& p : policies)
    {
      SimConfig c = base;
      c.policy = p;
      c.keep_series = true;
      cfgs.push_back (std::move (c));
      out.labels.push_back (p.label ());
    }
  for (auto& r : run_batch (cfgs))
    {
      out.series.push_back (std::move (r.series));
      out.metrics.push_back (std::move (r.metrics));
    }
  return out;
}

void
write_trace_csv (const SimTrace& trace, std::ostream& os)
{
  os << "slot";
  for (const char* col : {"Q", "S", "D"})
    for (int i = 1; i <= trace.n; ++i)
      os << ',' << col << '_' << i;
  os << '\n';
  for (std::size_t t = 0; t < trace.slots (); ++t)
    {
      os << t;
      for (int i = 0; i < trace.n; ++i)
        os << ',' << trace.q (t, i);
      for (int i = 0; i < trace.n; ++i)
        os << ',' << trace.S[t][i];
      for (int i = 0; i < trace.n; ++i)
        os << ',' << trace.D[t][i];
      os << '\n';
    }
}

} // namespace qnb
