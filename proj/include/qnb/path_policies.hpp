// path_policies.hpp
//
// Decision rules for path-graph interference networks and their catalog.

#pragma once

#include "qnb/policy.hpp"

#include <span>
#include <string>
#include <vector>

namespace qnb {

enum class ThreeQueueRule
{
  td,       // top-down
  bu,       // bottom-up
  iq_tilde, // inner-queue priority, MSM
  oq,       // outer-queue priority
  iq        // inner queue whenever nonempty (not MSM)
};

ActivationVector decide_three_queue (ThreeQueueRule rule, const OccupancyVector& z);

// rho(3) with parameter gamma; u is the single uniform draw used on
// zeta in {110, 011}.
ActivationVector decide_rho3 (const OccupancyVector& z, double gamma, double u);
std::vector<WeightedActivation> rho3_distribution (const OccupancyVector& z, double gamma);

// Left-to-right greedy over nonempty queues; empty queues left unblocked
// are then offered service (no departures, matches the 3-queue table).
ActivationVector decide_generic_td (const OccupancyVector& z);
ActivationVector decide_generic_bu (const OccupancyVector& z);

// Splice of BU on queues 1..N and TD on queues N..2N-1 (z has 2N-1 bits).
ActivationVector decide_spliced (const OccupancyVector& z);

ActivationVector decide_four_queue_td (const OccupancyVector& z);
ActivationVector decide_four_queue_ti (const OccupancyVector& z);
ActivationVector decide_four_queue_tilde (int variant, const OccupancyVector& z);

// Explicit branch rule for the 5-queue inner-priority MSM policy.
ActivationVector decide_five_queue_tilde (const OccupancyVector& z);

// MWIS over weights Q_i^alpha with the exact solver for the graph kind.
ActivationVector decide_maxweight (std::span<const std::int64_t> q, const ConflictGraph& g, double alpha);

ActivationVector decide_msm_random_tie (const OccupancyVector& z, Rng& rng);
std::vector<WeightedActivation> msm_random_tie_distribution (const OccupancyVector& z);

std::vector<std::string> path_policy_names ();
PolicyPtr make_path_policy (const PolicySpec& spec, const ConflictGraph& g);

} // namespace qnb
