// matching.cpp

#include "qnb/matching.hpp"

#include <algorithm>
#include <functional>

namespace qnb {

std::vector<Run>
RunDecomposition::runs () const
{
  std::vector<Run> r;
  for (std::size_t m = 0; m + 1 < j.size (); m += 2)
    r.push_back (Run{j[m], j[m + 1]});
  return r;
}

RunDecomposition
decompose_runs (const OccupancyVector& z)
{
  RunDecomposition d;
  int n = z.size ();
  int i = 0;
  while (i < n)
    {
      if (!z[i])
        {
          ++i;
          continue;
        }
      int b = i;
      while (i + 1 < n && z[i + 1])
        ++i;
      d.j.push_back (b);
      d.j.push_back (i);
      ++i;
    }
  d.k = static_cast<int> (d.j.size ());
  return d;
}

namespace {

int
runs_capacity (const OccupancyVector& z)
{
  int total = 0;
  for (const auto& r : decompose_runs (z).runs ())
    total += (r.length () + 1) / 2;
  return total;
}

OccupancyVector
clique_occupancy (const ConflictGraph& g, const OccupancyVector& z)
{
  OccupancyVector I (g.num_cliques ());
  for (int c = 0; c < g.num_cliques (); ++c)
    I.set (c, (z.mask () & g.clique_mask (c)) != 0);
  return I;
}

void
check_length (const OccupancyVector& z, const ActivationVector& s)
{
  if (z.size () != s.size ())
    throw DimensionError ("occupancy/activation length mismatch");
}

// True when s restricted to the run equals pred(j) for every queue j of it.
bool
run_matches (const ActivationVector& s, const Run& r, const std::function<bool (int)>& pred)
{
  for (int j = r.begin; j <= r.end; ++j)
    if (s[j] != pred (j))
      return false;
  return true;
}

void
write_run (ActivationVector& s, const Run& r, const std::function<bool (int)>& pred)
{
  for (int j = r.begin; j <= r.end; ++j)
    s.set (j, pred (j));
}

bool
even_from_start (const Run& r, int j)
{
  return (j - r.begin) % 2 == 0;
}

bool
odd_from_start (const Run& r, int j)
{
  return (j - r.begin) % 2 == 1;
}

bool
even_from_end (const Run& r, int j)
{
  return (r.end - j) % 2 == 0;
}

// Even-length run split at l: even offsets from the start left of l, even
// distance from the end right of l+1.
bool
split_pattern (const Run& r, int l, int j)
{
  if (j < l)
    return (j - r.begin) % 2 == 0;
  if (j > l + 1)
    return (r.end - j) % 2 == 0;
  return false;
}

} // namespace

int
max_independent_nonempty (const ConflictGraph& g, const OccupancyVector& z)
{
  if (z.size () != g.total_queues ())
    throw DimensionError ("occupancy length does not match graph");
  switch (g.kind ())
    {
    case GraphKind::path:
      return runs_capacity (z);
    case GraphKind::clique:
      return z.none () ? 0 : 1;
    case GraphKind::star_of_cliques:
      {
        auto I = clique_occupancy (g, z);
        int periph = I.count () - (I[0] ? 1 : 0);
        return std::max (I[0] ? 1 : 0, periph);
      }
    case GraphKind::linear_array_of_cliques:
      return runs_capacity (clique_occupancy (g, z));
    }
  return 0;
}

int
max_independent_nonempty_exhaustive (const ConflictGraph& g, const OccupancyVector& z)
{
  if (g.total_queues () > 20)
    throw DimensionError ("exhaustive search limited to 20 queues");
  std::uint64_t full = z.mask ();
  int best = 0;
  // Enumerate every subset of the nonempty queues.
  for (std::uint64_t sub = full;; sub = (sub - 1) & full)
    {
      ActivationVector s (g.total_queues (), sub);
      if (s.count () > best && is_activation_valid (g, s))
        best = s.count ();
      if (sub == 0)
        break;
    }
  return best;
}

bool
is_msm (const ConflictGraph& g, const OccupancyVector& z, const ActivationVector& s)
{
  check_length (z, s);
  if (!is_activation_valid (g, s))
    return false;
  return served (s, z).count () == max_independent_nonempty (g, z);
}

MsmConditions
msm_conditions (const OccupancyVector& z, const ActivationVector& s)
{
  check_length (z, s);
  MsmConditions c;
  auto runs = decompose_runs (z).runs ();
  int n = z.size ();
  for (const auto& r : runs)
    {
      auto even = [&] (int j) { return even_from_start (r, j); };
      auto odd = [&] (int j) { return odd_from_start (r, j); };
      if (r.length () % 2 == 1)
        {
          if (!run_matches (s, r, even))
            c.odd_run_ok = false;
          continue;
        }
      bool ok = run_matches (s, r, even) || run_matches (s, r, odd);
      // Split point l must sit at an odd offset so that the pattern keeps
      // the run's maximum count.
      for (int l = r.begin + 1; !ok && l + 1 < r.end; l += 2)
        ok = run_matches (s, r, [&] (int j) { return split_pattern (r, l, j); });
      if (!ok)
        c.even_run_ok = false;
    }

  if (!runs.empty ())
    {
      const Run& first = runs.front ();
      const Run& last = runs.back ();
      auto from_end = [&] (const Run& r) { return run_matches (s, r, [&] (int j) { return even_from_end (r, j); }); };
      auto from_start = [&] (const Run& r) { return run_matches (s, r, [&] (int j) { return even_from_start (r, j); }); };
      if (first.begin == 0 && first.end == n - 1)
        c.inner_priority_ok = from_end (first) || from_start (first);
      else
        {
          if (first.begin == 0 && !from_end (first))
            c.inner_priority_ok = false;
          if (last.end == n - 1 && !from_start (last))
            c.inner_priority_ok = false;
        }
    }
  return c;
}

ActivationVector
mwis_path (std::span<const double> w)
{
  int n = static_cast<int> (w.size ());
  for (double x : w)
    if (!(x >= 0.0))
      throw ContractError ("mwis_path needs non-negative weights");
  std::vector<double> best (static_cast<std::size_t> (n) + 2, 0.0);
  for (int i = n - 1; i >= 0; --i)
    {
      auto u = static_cast<std::size_t> (i);
      best[u] = std::max (best[u + 1], w[u] + best[u + 2]);
    }
  ActivationVector s (n);
  int i = 0;
  while (i < n)
    {
      auto u = static_cast<std::size_t> (i);
      // Prefer 0 at position i whenever skipping is still optimal.
      if (best[u + 1] >= w[u] + best[u + 2])
        ++i;
      else
        {
          s.set (i);
          i += 2;
        }
    }
  return s;
}

ActivationVector
project_L (const OccupancyVector& z, const ActivationVector& sp)
{
  check_length (z, sp);
  int n = z.size ();
  ActivationVector s (n);
  for (const auto& r : decompose_runs (z).runs ())
    {
      if (r.length () % 2 == 1)
        {
          write_run (s, r, [&] (int j) { return even_from_start (r, j); });
          continue;
        }
      bool first = sp[r.begin];
      bool last = sp[r.end];
      if (first && last)
        {
          int l = -1;
          for (int x = r.begin; x < r.end; ++x)
            if (!sp[x] && !sp[x + 1])
              {
                l = x;
                break;
              }
          if (l >= 0)
            write_run (s, r, [&] (int j) { return split_pattern (r, l, j); });
          else
            write_run (s, r, [&] (int j) { return even_from_start (r, j); });
        }
      else if (first)
        write_run (s, r, [&] (int j) { return even_from_start (r, j); });
      else
        write_run (s, r, [&] (int j) { return odd_from_start (r, j); });
    }
  // Offered service on empty queues is kept when it does not conflict.
  for (int j = 0; j < n; ++j)
    {
      if (z[j] || !sp[j])
        continue;
      bool left = j > 0 && s[j - 1];
      bool right = j + 1 < n && s[j + 1];
      if (!left && !right)
        s.set (j);
    }
  return s;
}

ActivationVector
refine_inner_priority (const OccupancyVector& z, const ActivationVector& s)
{
  check_length (z, s);
  int n = z.size ();
  if (!is_msm (ConflictGraph::path (n), z, s))
    throw ContractError ("refine_inner_priority: input " + s.to_string () + " is not MSM for " + z.to_string ());
  auto runs = decompose_runs (z).runs ();
  ActivationVector out = s;
  if (runs.empty ())
    return out;

  const Run first = runs.front ();
  const Run last = runs.back ();
  auto from_end = [&] (const Run& r) { return std::function<bool (int)> ([r] (int j) { return even_from_end (r, j); }); };
  auto from_start = [&] (const Run& r) { return std::function<bool (int)> ([r] (int j) { return even_from_start (r, j); }); };

  if (first.begin == 0 && first.end == n - 1)
    {
      if (!run_matches (out, first, from_end (first)) && !run_matches (out, first, from_start (first)))
        write_run (out, first, from_end (first));
      return out;
    }
  if (first.begin == 0)
    {
      write_run (out, first, from_end (first));
      if (first.end + 1 < n)
        out.set (first.end + 1, false);
    }
  if (last.end == n - 1)
    {
      write_run (out, last, from_start (last));
      if (last.begin > 0)
        out.set (last.begin - 1, false);
    }
  return out;
}

} // namespace qnb
