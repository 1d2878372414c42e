// model.cpp

#include "qnb/model.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace qnb {

QueueState::QueueState (std::vector<std::int64_t> b)
  : backlog (std::move (b))
{
  if (backlog.size () > static_cast<std::size_t> (kMaxQueues))
    throw DimensionError ("too many queues");
  for (auto x : backlog)
    if (x < 0)
      throw ContractError ("negative backlog");
}

OccupancyVector
occupancy_of (std::span<const std::int64_t> backlog)
{
  OccupancyVector z (static_cast<int> (backlog.size ()));
  for (std::size_t i = 0; i < backlog.size (); ++i)
    if (backlog[i] > 0)
      z.set (static_cast<int> (i));
  return z;
}

OccupancyVector
occupancy_of (const QueueState& q)
{
  return occupancy_of (std::span<const std::int64_t> (q.backlog));
}

RateVector::RateVector (std::initializer_list<double> r)
  : RateVector (std::vector<double> (r))
{
}

RateVector::RateVector (std::vector<double> r)
  : m_rates (std::move (r))
{
  if (m_rates.size () > static_cast<std::size_t> (kMaxQueues))
    throw DimensionError ("too many rates");
  for (double x : m_rates)
    if (!(x >= 0.0 && x <= 1.0))
      throw ConfigError ("arrival rate outside [0,1]: " + std::to_string (x));
}

double
RateVector::total () const
{
  return std::accumulate (m_rates.begin (), m_rates.end (), 0.0);
}

RateVector
RateVector::scaled (double s) const
{
  // s may exceed 1 (out-of-region sweep points); each rate must stay <= 1.
  if (!(s >= 0.0))
    throw ConfigError ("scale must be non-negative");
  std::vector<double> r (m_rates);
  for (auto& x : r)
    x *= s;
  return RateVector (std::move (r));
}

std::string
to_string (GraphKind k)
{
  switch (k)
    {
    case GraphKind::path:
      return "path";
    case GraphKind::clique:
      return "clique";
    case GraphKind::star_of_cliques:
      return "star_of_cliques";
    case GraphKind::linear_array_of_cliques:
      return "linear_array_of_cliques";
    }
  return "?";
}

ConflictGraph::ConflictGraph (GraphKind kind, std::vector<int> sizes)
  : m_kind (kind), m_sizes (std::move (sizes))
{
  if (m_sizes.empty ())
    throw ConfigError ("graph needs at least one clique");
  for (int s : m_sizes)
    if (s <= 0)
      throw ConfigError ("clique sizes must be positive");
  m_n = std::accumulate (m_sizes.begin (), m_sizes.end (), 0);
  if (m_n > kMaxQueues)
    throw ConfigError ("at most 64 queues are supported");

  int off = 0;
  for (std::size_t c = 0; c < m_sizes.size (); ++c)
    {
      m_begin.push_back (off);
      for (int k = 0; k < m_sizes[c]; ++k)
        m_clique_of.push_back (static_cast<int> (c));
      off += m_sizes[c];
    }

  m_adj.assign (static_cast<std::size_t> (m_n), 0);
  auto link = [this] (int i, int j) {
    if (i == j)
      return;
    m_adj[static_cast<std::size_t> (i)] |= std::uint64_t{1} << j;
    m_adj[static_cast<std::size_t> (j)] |= std::uint64_t{1} << i;
  };
  auto link_cliques = [&] (int a, int b) {
    for (int i = 0; i < m_n; ++i)
      for (int j = 0; j < m_n; ++j)
        if (m_clique_of[static_cast<std::size_t> (i)] == a && m_clique_of[static_cast<std::size_t> (j)] == b)
          link (i, j);
  };

  int nc = num_cliques ();
  switch (m_kind)
    {
    case GraphKind::path:
      for (int i = 0; i + 1 < m_n; ++i)
        link (i, i + 1);
      break;
    case GraphKind::clique:
      link_cliques (0, 0);
      break;
    case GraphKind::star_of_cliques:
      for (int c = 0; c < nc; ++c)
        link_cliques (c, c);
      for (int c = 1; c < nc; ++c)
        link_cliques (0, c);
      break;
    case GraphKind::linear_array_of_cliques:
      for (int c = 0; c < nc; ++c)
        link_cliques (c, c);
      for (int c = 0; c + 1 < nc; ++c)
        link_cliques (c, c + 1);
      break;
    }
}

ConflictGraph
ConflictGraph::path (int n)
{
  if (n <= 0)
    throw ConfigError ("path needs N >= 1");
  return ConflictGraph (GraphKind::path, std::vector<int> (static_cast<std::size_t> (n), 1));
}

ConflictGraph
ConflictGraph::clique (int n)
{
  if (n <= 0)
    throw ConfigError ("clique needs N >= 1");
  return ConflictGraph (GraphKind::clique, {n});
}

ConflictGraph
ConflictGraph::star_of_cliques (std::vector<int> sizes)
{
  return ConflictGraph (GraphKind::star_of_cliques, std::move (sizes));
}

ConflictGraph
ConflictGraph::linear_array_of_cliques (std::vector<int> sizes)
{
  return ConflictGraph (GraphKind::linear_array_of_cliques, std::move (sizes));
}

bool
ConflictGraph::adjacent (int i, int j) const
{
  if (i < 0 || j < 0 || i >= m_n || j >= m_n)
    throw DimensionError ("queue index out of range");
  return (neighbors (i) >> j) & 1u;
}

std::uint64_t
ConflictGraph::clique_mask (int c) const
{
  int b = clique_begin (c);
  int s = clique_size (c);
  std::uint64_t m = s >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << s) - 1);
  return m << b;
}

std::string
ConflictGraph::describe () const
{
  std::ostringstream os;
  os << to_string (m_kind) << "(";
  if (m_kind == GraphKind::path || m_kind == GraphKind::clique)
    os << m_n;
  else
    for (std::size_t c = 0; c < m_sizes.size (); ++c)
      os << (c ? "," : "") << m_sizes[c];
  os << ")";
  return os.str ();
}

bool
is_activation_valid (const ConflictGraph& g, const ActivationVector& s)
{
  if (s.size () != g.total_queues ())
    throw DimensionError ("activation length does not match graph");
  std::uint64_t m = s.mask ();
  while (m)
    {
      int i = std::countr_zero (m);
      m &= m - 1;
      if (g.neighbors (i) & s.mask ())
        return false;
    }
  return true;
}

namespace {

std::vector<double>
clique_totals (const ConflictGraph& g, const RateVector& lambda)
{
  if (lambda.size () != g.total_queues ())
    throw DimensionError ("rate vector length does not match graph");
  std::vector<double> t (static_cast<std::size_t> (g.num_cliques ()), 0.0);
  for (int i = 0; i < lambda.size (); ++i)
    t[static_cast<std::size_t> (g.clique_of (i))] += lambda[i];
  return t;
}

} // namespace

double
region_load (const ConflictGraph& g, const RateVector& lambda)
{
  auto t = clique_totals (g, lambda);
  std::size_t nc = t.size ();
  double worst = 0.0;
  switch (g.kind ())
    {
    case GraphKind::clique:
      worst = t[0];
      break;
    case GraphKind::path:
    case GraphKind::linear_array_of_cliques:
      if (nc == 1)
        worst = t[0];
      for (std::size_t c = 0; c + 1 < nc; ++c)
        worst = std::max (worst, t[c] + t[c + 1]);
      break;
    case GraphKind::star_of_cliques:
      if (nc == 1)
        worst = t[0];
      for (std::size_t c = 1; c < nc; ++c)
        worst = std::max (worst, t[0] + t[c]);
      break;
    }
  return worst;
}

bool
in_capacity_region (const ConflictGraph& g, const RateVector& lambda, bool strict)
{
  double load = region_load (g, lambda);
  return strict ? load < 1.0 : load <= 1.0;
}

bool
in_gamma_inner_bound (const RateVector& lambda, double gamma)
{
  if (lambda.size () != 3)
    throw DimensionError ("gamma inner bound is defined for three queues");
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw ConfigError ("gamma must lie in (0,1]");
  return lambda[0] + lambda[1] < gamma && lambda[1] + lambda[2] < gamma;
}

RateVector
at_load (const ConflictGraph& g, const RateVector& lambda, double target)
{
  double load = region_load (g, lambda);
  if (load <= 0.0)
    throw ConfigError ("cannot rescale a zero rate vector");
  std::vector<double> r (lambda.values ());
  for (auto& x : r)
    x = x * target / load;
  return RateVector (std::move (r));
}

} // namespace qnb
