// matching.hpp
//
// Run decomposition of occupancy vectors, maximum-size matching (MSM)
// checks, linear-time MWIS on paths, the projection L and the inner-queue
// priority rewrite. All functions are pure.

#pragma once

#include "qnb/model.hpp"

#include <span>
#include <vector>

namespace qnb {

struct Run
{
  int begin = 0; // first nonempty queue (0-based)
  int end = 0;   // last nonempty queue, inclusive
  int length () const { return end - begin + 1; }
};

struct RunDecomposition
{
  int k = 0;          // twice the number of runs
  std::vector<int> j; // j[0]=j_1, j[1]=j_2, ... (0-based queue indices)

  std::vector<Run> runs () const;
};

RunDecomposition decompose_runs (const OccupancyVector& z);

// Size of a maximum independent set among nonempty queues.
int max_independent_nonempty (const ConflictGraph& g, const OccupancyVector& z);
// Brute force over all subsets; used as a test oracle (total_queues <= 20).
int max_independent_nonempty_exhaustive (const ConflictGraph& g, const OccupancyVector& z);

bool is_msm (const ConflictGraph& g, const OccupancyVector& z, const ActivationVector& s);

struct MsmConditions
{
  bool odd_run_ok = true;
  bool even_run_ok = true;
  bool inner_priority_ok = true;
};

MsmConditions msm_conditions (const OccupancyVector& z, const ActivationVector& s);

// Maximum-weight independent set on a path. Ties resolve to the
// lexicographically smallest bit pattern read from queue 1.
ActivationVector mwis_path (std::span<const double> weights);

ActivationVector project_L (const OccupancyVector& z, const ActivationVector& s_inner);

// Throws ContractError when s is not MSM for z.
ActivationVector refine_inner_priority (const OccupancyVector& z, const ActivationVector& s);

} // namespace qnb
