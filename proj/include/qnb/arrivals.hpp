// arrivals.hpp
//
// Bernoulli and two-state Markov arrival streams. Each queue draws from its
// own generator keyed by (seed, queue index), so two streams built from the
// same spec replay identical sample paths.

#pragma once

#include "qnb/model.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace qnb {

// 64-bit generator keyed by (seed, stream id).
class Rng
{
public:
  Rng () : Rng (0, 0) {}
  Rng (std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64 () { return m_eng (); }
  // Uniform on [0,1) with 53 random bits.
  double uniform () { return static_cast<double> (m_eng () >> 11) * 0x1.0p-53; }
  bool bernoulli (double p) { return uniform () < p; }
  // Uniform integer in [0, n).
  std::uint64_t below (std::uint64_t n);

private:
  std::mt19937_64 m_eng;
};

// Stream id used for policy-internal randomness ("policy" in ASCII).
inline constexpr std::uint64_t kPolicyStream = 0x706f6c696379ULL;

struct ArrivalSpec
{
  enum class Kind
  {
    bernoulli,
    markov
  };

  Kind kind = Kind::bernoulli;
  std::vector<double> rate; // Bernoulli lambda_i
  std::vector<double> p;    // Markov P(0 -> 1)
  std::vector<double> q;    // Markov P(1 -> 0)
  std::uint64_t seed = 1;

  static ArrivalSpec bernoulli (const RateVector& lambda, std::uint64_t seed);
  static ArrivalSpec markov (std::vector<double> p, std::vector<double> q, std::uint64_t seed);
  // p fixed, q = (1/lambda - 1) p so that the stationary mean is lambda.
  static ArrivalSpec markov_with_means (const RateVector& lambda, double p, std::uint64_t seed);

  int size () const;
  std::vector<double> means () const;
  ArrivalSpec with_seed (std::uint64_t s) const;
  void validate () const;
};

class ArrivalStream
{
public:
  explicit ArrivalStream (const ArrivalSpec& spec);

  // Arrivals A_i(t) for the next slot; bit i set when queue i receives one.
  OccupancyVector next ();
  void next (std::vector<std::uint8_t>& out);
  int size () const { return static_cast<int> (m_rng.size ()); }

private:
  ArrivalSpec m_spec;
  std::vector<Rng> m_rng;
  std::vector<std::uint8_t> m_state;
};

RateVector scale_trajectory (const RateVector& base, double s);

} // namespace qnb
