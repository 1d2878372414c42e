// engine.hpp
//
// Slotted simulation. In slot t the policy sees Q(t) just after the slot-t
// arrivals, departures are D = S & zeta, and Q(t+1) = Q(t) - D(t) + A(t+1).

#pragma once

#include "qnb/arrivals.hpp"
#include "qnb/model.hpp"
#include "qnb/policy.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qnb {

struct Monitors
{
  bool property_P = false;
  bool msm = false;
  bool activation_valid = true;
};

struct SimConfig
{
  ConflictGraph graph = ConflictGraph::path (1);
  ArrivalSpec arrivals;
  PolicySpec policy;
  std::uint64_t horizon = 1000000;
  std::int64_t warmup = -1; // negative: 10% of the horizon
  std::uint64_t seed = 1;   // replaces arrivals.seed
  Monitors monitors;
  std::vector<std::int64_t> initial; // Q before the first arrivals, default zero

  bool keep_series = false;      // per-slot sum backlog
  std::uint64_t trace_slots = 0; // record the first trace_slots slots

  double eps_s = 1e-3;
  double bound_s = 1e4;

  std::uint64_t effective_warmup () const;
  void validate () const;
};

struct Metrics
{
  std::uint64_t slots = 0;
  std::uint64_t warmup = 0;
  double mean_sum_backlog = 0.0;
  std::vector<double> per_queue_mean;
  std::int64_t max_sum_backlog = 0;
  double growth_slope = 0.0;      // least squares over the last half
  double late_growth_slope = 0.0; // over the last quarter
  std::vector<double> queue_slopes;
  std::vector<double> offered_fraction;
  std::vector<double> departure_fraction;
  std::vector<std::uint64_t> histogram; // post-warmup sum backlog counts, last bin is overflow
  std::uint64_t property_P_violations = 0;
  std::uint64_t msm_violations = 0;
  double eps_s = 1e-3;
  double bound_s = 1e4;
};

// Per-slot record; Q is the state at t+.
struct SimTrace
{
  int n = 0;
  std::vector<std::int64_t> Q; // slot-major, n entries per slot
  std::vector<ActivationVector> S;
  std::vector<ActivationVector> D;
  std::size_t slots () const { return S.size (); }
  std::int64_t q (std::size_t t, int i) const { return Q[t * static_cast<std::size_t> (n) + static_cast<std::size_t> (i)]; }
};

struct SimResult
{
  Metrics metrics;
  std::vector<std::int64_t> series;
  SimTrace trace;
};

SimResult run (const SimConfig& config);

// Runs independent configs on up to QNB_THREADS worker threads.
std::vector<SimResult> run_batch (const std::vector<SimConfig>& configs);
unsigned worker_threads ();

enum class Verdict
{
  stable,
  unstable,
  inconclusive
};

std::string to_string (Verdict v);
Verdict stability_verdict (const Metrics& m);

struct CoupledResult
{
  std::vector<std::string> labels;
  std::vector<std::vector<std::int64_t>> series;
  std::vector<Metrics> metrics;
};

// Same seed, initial state and arrival sample path for every policy.
CoupledResult coupled_compare (const std::vector<PolicySpec>& policies, const SimConfig& base);

struct PropertyViolation
{
  std::uint64_t slot;
  int a; // queue pair (path) or clique pair (cliques), 0-based
  int b;
};

// Pairs whose backlog is positive while nothing departs from them, or the
// reverse. Path graphs use adjacent queues, stars (centre, peripheral)
// clique totals, linear arrays adjacent clique totals.
std::vector<PropertyViolation> check_property_P (const SimTrace& trace, const ConflictGraph& g);
int property_P_violations (const ConflictGraph& g, std::span<const std::int64_t> q, std::uint64_t departures);

void write_trace_csv (const SimTrace& trace, std::ostream& os);

} // namespace qnb
