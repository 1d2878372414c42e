// oracle.cpp

#include "qnb/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace qnb {

std::vector<int>
TruncatedChain::decode (std::size_t x) const
{
  std::vector<int> q (static_cast<std::size_t> (n));
  for (int i = 0; i < n; ++i)
    {
      q[static_cast<std::size_t> (i)] = static_cast<int> (x % static_cast<std::size_t> (B + 1));
      x /= static_cast<std::size_t> (B + 1);
    }
  return q;
}

std::size_t
TruncatedChain::encode (std::span<const int> q) const
{
  std::size_t x = 0;
  for (int i = n - 1; i >= 0; --i)
    x = x * static_cast<std::size_t> (B + 1) + static_cast<std::size_t> (q[static_cast<std::size_t> (i)]);
  return x;
}

TruncatedChain
build_chain (const ConflictGraph& g, const RateVector& lambda, const Policy& policy, int B)
{
  int n = g.total_queues ();
  if (n < 1 || n > kMaxOracleQueues)
    throw DimensionError ("oracle supports 1.." + std::to_string (kMaxOracleQueues) + " queues");
  if (B < 1 || B > kMaxOracleBound)
    throw DimensionError ("truncation bound must lie in 1.." + std::to_string (kMaxOracleBound));
  if (lambda.size () != n)
    throw DimensionError ("rate vector does not match graph");
  if (!policy.is_stateless ())
    throw ContractError ("oracle needs a stateless policy, got " + policy.name ());
  if (!(policy.graph () == g))
    throw ConfigError ("policy graph differs from chain graph");

  TruncatedChain c;
  c.graph = g;
  c.lambda = lambda;
  c.B = B;
  c.n = n;
  c.states = 1;
  for (int i = 0; i < n; ++i)
    c.states *= static_cast<std::size_t> (B + 1);
  c.row_ptr.push_back (0);
  c.offered.assign (c.states * static_cast<std::size_t> (n), 0.0);

  // Arrival pattern probabilities.
  std::vector<double> pa (std::size_t{1} << n, 1.0);
  for (std::uint64_t a = 0; a < pa.size (); ++a)
    for (int i = 0; i < n; ++i)
      pa[a] *= ((a >> i) & 1u) ? lambda[i] : 1.0 - lambda[i];

  std::vector<std::int64_t> backlog (static_cast<std::size_t> (n));
  std::vector<int> next (static_cast<std::size_t> (n));
  std::map<std::size_t, double> row;
  for (std::size_t x = 0; x < c.states; ++x)
    {
      auto q = c.decode (x);
      std::copy (q.begin (), q.end (), backlog.begin ());
      Observation obs{backlog, occupancy_of (backlog), 0};
      row.clear ();
      for (const auto& [p, s] : policy.decision_distribution (obs))
        {
          if (!is_activation_valid (g, s))
            throw ContractError ("policy emitted invalid activation " + s.to_string ());
          for (int i = 0; i < n; ++i)
            if (s[i])
              c.offered[x * static_cast<std::size_t> (n) + static_cast<std::size_t> (i)] += p;
          for (std::uint64_t a = 0; a < pa.size (); ++a)
            {
              if (pa[a] == 0.0)
                continue;
              for (int i = 0; i < n; ++i)
                {
                  auto u = static_cast<std::size_t> (i);
                  int v = q[u] - ((s[i] && q[u] > 0) ? 1 : 0);
                  next[u] = std::min (B, v + static_cast<int> ((a >> i) & 1u));
                }
              row[c.encode (next)] += p * pa[a];
            }
        }
      for (const auto& [to, p] : row)
        {
          c.col.push_back (static_cast<std::uint32_t> (to));
          c.val.push_back (p);
        }
      c.row_ptr.push_back (c.col.size ());
    }
  return c;
}

double
max_row_error (const TruncatedChain& c)
{
  double worst = 0.0;
  for (std::size_t x = 0; x < c.states; ++x)
    {
      double s = 0.0;
      for (std::size_t k = c.row_ptr[x]; k < c.row_ptr[x + 1]; ++k)
        {
          if (c.val[k] < 0.0)
            return INFINITY;
          s += c.val[k];
        }
      worst = std::max (worst, std::abs (s - 1.0));
    }
  return worst;
}

std::vector<double>
stationary (const TruncatedChain& c, StationaryOptions opt)
{
  if (!(opt.tol > 0.0))
    throw ConfigError ("stationary: tolerance must be positive");
  std::vector<double> pi (c.states, 1.0 / static_cast<double> (c.states)), nxt (c.states);
  for (std::size_t it = 0; it < opt.max_iter; ++it)
    {
      std::fill (nxt.begin (), nxt.end (), 0.0);
      for (std::size_t x = 0; x < c.states; ++x)
        {
          double px = pi[x];
          if (px == 0.0)
            continue;
          for (std::size_t k = c.row_ptr[x]; k < c.row_ptr[x + 1]; ++k)
            nxt[c.col[k]] += px * c.val[k];
        }
      double tv = 0.0, total = 0.0;
      for (std::size_t x = 0; x < c.states; ++x)
        {
          tv += std::abs (nxt[x] - pi[x]);
          total += nxt[x];
        }
      for (auto& v : nxt)
        v /= total;
      pi.swap (nxt);
      if (0.5 * tv < opt.tol)
        return pi;
    }
  throw ContractError ("stationary: no convergence within " + std::to_string (opt.max_iter) + " iterations");
}

double
probability (const TruncatedChain& c, const std::vector<double>& pi,
             const std::function<bool (const std::vector<int>&)>& event)
{
  double p = 0.0;
  for (std::size_t x = 0; x < c.states; ++x)
    if (event (c.decode (x)))
      p += pi[x];
  return p;
}

double
offered_probability (const TruncatedChain& c, const std::vector<double>& pi, int queue)
{
  double p = 0.0;
  for (std::size_t x = 0; x < c.states; ++x)
    p += pi[x] * c.offered[x * static_cast<std::size_t> (c.n) + static_cast<std::size_t> (queue)];
  return p;
}

std::vector<FormulaRow>
verify_formulas (const TruncatedChain& c, const std::vector<double>& pi)
{
  std::vector<FormulaRow> rows;
  const auto& l = c.lambda;
  auto P = [&] (auto ev) { return probability (c, pi, ev); };
  if (c.n == 3)
    {
      double e1 = 1 - l[0];
      double e2 = 1 - l[1] / (1 - l[0]);
      double e3 = 1 - l[2] / (1 - l[1]);
      rows.push_back ({"P{Q_1=0}", e1, P ([] (const auto& q) { return q[0] == 0; })});
      rows.push_back ({"P{Q_2=0}", e2, P ([] (const auto& q) { return q[1] == 0; })});
      rows.push_back ({"P{Q_3=0}", e3, P ([] (const auto& q) { return q[2] == 0; })});
      rows.push_back ({"P{Q=0}", e1 * e2 * e3, P ([] (const auto& q) { return q[0] + q[1] + q[2] == 0; })});
      rows.push_back ({"P{S_3=1}", 1 - l[1], offered_probability (c, pi, 2)});
      for (int b2 = 0; b2 < 2; ++b2)
        for (int b3 = 0; b3 < 2; ++b3)
          {
            double f2 = b2 ? 1 - e2 : e2;
            double f3 = b3 ? 1 - e3 : e3;
            std::string name = std::string ("P{Q_2") + (b2 ? ">0" : "=0") + ",Q_3" + (b3 ? ">0" : "=0") + "}";
            rows.push_back ({name, f2 * f3, P ([&] (const auto& q) { return (q[1] > 0) == (b2 == 1) && (q[2] > 0) == (b3 == 1); })});
          }
    }
  else if (c.n == 4)
    rows.push_back ({"P{S_4=1}", 1 - l[2], offered_probability (c, pi, 3)});
  else
    throw DimensionError ("closed forms exist for 3 or 4 queues only");
  return rows;
}

double
truncated_difference (const std::vector<double>& pmf_a, const std::vector<double>& pmf_b)
{
  double e = 0.0;
  for (std::size_t a = 0; a < pmf_a.size (); ++a)
    for (std::size_t b = 0; b < pmf_b.size (); ++b)
      if (a > b)
        e += pmf_a[a] * pmf_b[b] * static_cast<double> (a - b);
  return e;
}

double
truncated_difference_formula (const std::vector<double>& pmf_a, double b)
{
  double mean = 0.0;
  for (std::size_t a = 0; a < pmf_a.size (); ++a)
    mean += static_cast<double> (a) * pmf_a[a];
  return mean - b * (1.0 - (pmf_a.empty () ? 1.0 : pmf_a[0]));
}

std::vector<double>
binomial_pmf (int k, double p)
{
  std::vector<double> pmf (static_cast<std::size_t> (k) + 1);
  for (int j = 0; j <= k; ++j)
    pmf[static_cast<std::size_t> (j)] = std::tgamma (k + 1) / (std::tgamma (j + 1) * std::tgamma (k - j + 1)) *
                                        std::pow (p, j) * std::pow (1 - p, k - j);
  return pmf;
}

} // namespace qnb
