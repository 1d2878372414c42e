// arrivals.cpp

#include "qnb/arrivals.hpp"

#include <cmath>

namespace qnb {

Rng::Rng (std::uint64_t seed, std::uint64_t stream)
{
  std::seed_seq seq{static_cast<std::uint32_t> (seed), static_cast<std::uint32_t> (seed >> 32),
                    static_cast<std::uint32_t> (stream), static_cast<std::uint32_t> (stream >> 32),
                    0x51edu};
  m_eng.seed (seq);
}

std::uint64_t
Rng::below (std::uint64_t n)
{
  if (n == 0)
    throw ContractError ("Rng::below(0)");
  // Rejection sampling keeps the draw exactly uniform.
  std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do
    x = m_eng ();
  while (x >= limit);
  return x % n;
}

ArrivalSpec
ArrivalSpec::bernoulli (const RateVector& lambda, std::uint64_t seed)
{
  ArrivalSpec s;
  s.kind = Kind::bernoulli;
  s.rate = lambda.values ();
  s.seed = seed;
  return s;
}

ArrivalSpec
ArrivalSpec::markov (std::vector<double> p, std::vector<double> q, std::uint64_t seed)
{
  ArrivalSpec s;
  s.kind = Kind::markov;
  s.p = std::move (p);
  s.q = std::move (q);
  s.seed = seed;
  s.validate ();
  return s;
}

ArrivalSpec
ArrivalSpec::markov_with_means (const RateVector& lambda, double p, std::uint64_t seed)
{
  std::vector<double> pv, qv;
  for (double l : lambda.values ())
    {
      if (l <= 0.0)
        {
          // Absorbing "off" chain: never produces an arrival.
          pv.push_back (0.0);
          qv.push_back (1.0);
        }
      else
        {
          double qq = (1.0 / l - 1.0) * p;
          if (qq > 1.0)
            throw ConfigError ("Markov arrivals: q=(1/lambda-1)p exceeds 1 for lambda=" + std::to_string (l));
          pv.push_back (p);
          qv.push_back (qq);
        }
    }
  return markov (std::move (pv), std::move (qv), seed);
}

int
ArrivalSpec::size () const
{
  return static_cast<int> (kind == Kind::bernoulli ? rate.size () : p.size ());
}

std::vector<double>
ArrivalSpec::means () const
{
  if (kind == Kind::bernoulli)
    return rate;
  std::vector<double> m;
  for (std::size_t i = 0; i < p.size (); ++i)
    m.push_back (p[i] + q[i] > 0.0 ? p[i] / (p[i] + q[i]) : 0.0);
  return m;
}

ArrivalSpec
ArrivalSpec::with_seed (std::uint64_t s) const
{
  ArrivalSpec c = *this;
  c.seed = s;
  return c;
}

void
ArrivalSpec::validate () const
{
  if (kind == Kind::bernoulli)
    {
      RateVector check (rate);
      (void) check;
      return;
    }
  if (p.size () != q.size ())
    throw ConfigError ("Markov arrivals: p and q lengths differ");
  for (std::size_t i = 0; i < p.size (); ++i)
    {
      if (!(p[i] >= 0.0 && p[i] <= 1.0 && q[i] >= 0.0 && q[i] <= 1.0) || p[i] + q[i] <= 0.0)
        throw ConfigError ("Markov arrivals: transition probabilities must lie in [0,1] with p+q>0");
    }
}

ArrivalStream::ArrivalStream (const ArrivalSpec& spec)
  : m_spec (spec)
{
  m_spec.validate ();
  int n = m_spec.size ();
  for (int i = 0; i < n; ++i)
    m_rng.emplace_back (m_spec.seed, static_cast<std::uint64_t> (i));
  m_state.assign (static_cast<std::size_t> (n), 0);
  if (m_spec.kind == ArrivalSpec::Kind::markov)
    {
      auto mean = m_spec.means ();
      for (int i = 0; i < n; ++i)
        m_state[static_cast<std::size_t> (i)] = m_rng[static_cast<std::size_t> (i)].bernoulli (mean[static_cast<std::size_t> (i)]);
    }
}

void
ArrivalStream::next (std::vector<std::uint8_t>& out)
{
  std::size_t n = m_rng.size ();
  out.resize (n);
  if (m_spec.kind == ArrivalSpec::Kind::bernoulli)
    {
      for (std::size_t i = 0; i < n; ++i)
        {
          double l = m_spec.rate[i];
          // Always consume one draw so the stream position is rate independent.
          double u = m_rng[i].uniform ();
          out[i] = l >= 1.0 ? 1 : (u < l);
        }
      return;
    }
  for (std::size_t i = 0; i < n; ++i)
    {
      out[i] = m_state[i];
      double u = m_rng[i].uniform ();
      if (m_state[i])
        m_state[i] = !(u < m_spec.q[i]);
      else
        m_state[i] = u < m_spec.p[i];
    }
}

OccupancyVector
ArrivalStream::next ()
{
  std::vector<std::uint8_t> a;
  next (a);
  OccupancyVector v (static_cast<int> (a.size ()));
  for (std::size_t i = 0; i < a.size (); ++i)
    v.set (static_cast<int> (i), a[i] != 0);
  return v;
}

RateVector
scale_trajectory (const RateVector& base, double s)
{
  return base.scaled (s);
}

} // namespace qnb
