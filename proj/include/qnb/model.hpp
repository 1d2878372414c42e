// model.hpp
//
// Interference graphs, state/activation bit vectors, rate vectors and
// capacity region tests. Queues are 0-based internally.

#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qnb {

class DimensionError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

class ContractError : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kMaxQueues = 64;

// Fixed-capacity bit vector; bit i is queue i. The tag keeps occupancy and
// activation vectors from being mixed up silently.
template <class Tag>
class BitVector
{
public:
  BitVector () = default;

  explicit BitVector (int n, std::uint64_t mask = 0)
    : m_mask (mask), m_size (n)
  {
    if (n < 0 || n > kMaxQueues)
      throw DimensionError ("bit vector size out of range: " + std::to_string (n));
    if (n < kMaxQueues)
      m_mask &= (std::uint64_t{1} << n) - 1;
  }

  BitVector (std::initializer_list<int> bits)
    : BitVector (static_cast<int> (bits.size ()))
  {
    int i = 0;
    for (int b : bits)
      set (i++, b != 0);
  }

  // "0110" lists queue 1 first.
  static BitVector from_string (std::string_view s)
  {
    BitVector v (static_cast<int> (s.size ()));
    for (std::size_t i = 0; i < s.size (); ++i)
      {
        if (s[i] != '0' && s[i] != '1')
          throw ConfigError ("bad bit string: " + std::string (s));
        v.set (static_cast<int> (i), s[i] == '1');
      }
    return v;
  }

  int size () const { return m_size; }
  std::uint64_t mask () const { return m_mask; }
  bool operator[] (int i) const { return (m_mask >> i) & 1u; }
  bool test (int i) const { return (*this)[i]; }
  int count () const { return std::popcount (m_mask); }
  bool none () const { return m_mask == 0; }

  void set (int i, bool v = true)
  {
    if (v)
      m_mask |= std::uint64_t{1} << i;
    else
      m_mask &= ~(std::uint64_t{1} << i);
  }

  std::string to_string () const
  {
    std::string s (static_cast<std::size_t> (m_size), '0');
    for (int i = 0; i < m_size; ++i)
      if (test (i))
        s[static_cast<std::size_t> (i)] = '1';
    return s;
  }

  BitVector reversed () const
  {
    BitVector r (m_size);
    for (int i = 0; i < m_size; ++i)
      r.set (m_size - 1 - i, test (i));
    return r;
  }

  friend bool operator== (const BitVector&, const BitVector&) = default;

private:
  std::uint64_t m_mask = 0;
  int m_size = 0;
};

using OccupancyVector = BitVector<struct OccupancyTag>;
using ActivationVector = BitVector<struct ActivationTag>;

// Queues that are both offered service and nonempty.
inline ActivationVector served (const ActivationVector& s, const OccupancyVector& z)
{
  if (s.size () != z.size ())
    throw DimensionError ("activation/occupancy length mismatch");
  return ActivationVector (s.size (), s.mask () & z.mask ());
}

struct QueueState
{
  std::vector<std::int64_t> backlog;

  QueueState () = default;
  explicit QueueState (std::vector<std::int64_t> b);
  int size () const { return static_cast<int> (backlog.size ()); }
};

OccupancyVector occupancy_of (const QueueState& q);
OccupancyVector occupancy_of (std::span<const std::int64_t> backlog);

class RateVector
{
public:
  RateVector () = default;
  RateVector (std::initializer_list<double> r);
  explicit RateVector (std::vector<double> r);

  int size () const { return static_cast<int> (m_rates.size ()); }
  double operator[] (int i) const { return m_rates[static_cast<std::size_t> (i)]; }
  const std::vector<double>& values () const { return m_rates; }
  double total () const;
  RateVector scaled (double s) const;

private:
  std::vector<double> m_rates;
};

enum class GraphKind
{
  path,
  clique,
  star_of_cliques,
  linear_array_of_cliques
};

std::string to_string (GraphKind k);

class ConflictGraph
{
public:
  static ConflictGraph path (int n);
  static ConflictGraph clique (int n);
  // sizes[0] is the central clique.
  static ConflictGraph star_of_cliques (std::vector<int> sizes);
  static ConflictGraph linear_array_of_cliques (std::vector<int> sizes);

  GraphKind kind () const { return m_kind; }
  int total_queues () const { return m_n; }
  bool adjacent (int i, int j) const;
  std::uint64_t neighbors (int i) const { return m_adj[static_cast<std::size_t> (i)]; }

  // Path graphs report one singleton clique per queue, a Clique graph one
  // clique, CoC graphs their declared cliques (clique-major flattening).
  int num_cliques () const { return static_cast<int> (m_sizes.size ()); }
  std::span<const int> clique_sizes () const { return m_sizes; }
  int clique_begin (int c) const { return m_begin[static_cast<std::size_t> (c)]; }
  int clique_size (int c) const { return m_sizes[static_cast<std::size_t> (c)]; }
  int clique_of (int i) const { return m_clique_of[static_cast<std::size_t> (i)]; }
  std::uint64_t clique_mask (int c) const;

  bool is_coc () const
  {
    return m_kind == GraphKind::star_of_cliques || m_kind == GraphKind::linear_array_of_cliques;
  }

  std::string describe () const;

  friend bool operator== (const ConflictGraph& a, const ConflictGraph& b)
  {
    return a.m_kind == b.m_kind && a.m_sizes == b.m_sizes;
  }

private:
  ConflictGraph (GraphKind kind, std::vector<int> sizes);

  GraphKind m_kind = GraphKind::path;
  int m_n = 0;
  std::vector<int> m_sizes;
  std::vector<int> m_begin;
  std::vector<int> m_clique_of;
  std::vector<std::uint64_t> m_adj;
};

bool is_activation_valid (const ConflictGraph& g, const ActivationVector& s);

// Per-clique rate totals followed by the largest constraint sum. A rate
// vector is in the open region iff region_load < 1.
double region_load (const ConflictGraph& g, const RateVector& lambda);
bool in_capacity_region (const ConflictGraph& g, const RateVector& lambda, bool strict);
bool in_gamma_inner_bound (const RateVector& lambda, double gamma);

// Rescales lambda so that region_load equals target (e.g. 0.9 of boundary).
RateVector at_load (const ConflictGraph& g, const RateVector& lambda, double target);

} // namespace qnb
