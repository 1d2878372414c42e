// oracle.hpp
//
// Exact stationary analysis of small systems with backlogs truncated at B.
// Arrivals to a full queue are dropped.

#pragma once

#include "qnb/model.hpp"
#include "qnb/policy.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace qnb {

struct TruncatedChain
{
  ConflictGraph graph = ConflictGraph::path (1);
  RateVector lambda;
  int B = 0;
  int n = 0;
  std::size_t states = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::uint32_t> col;
  std::vector<double> val;
  std::vector<double> offered; // states x n, P{S_i = 1 | state}

  std::vector<int> decode (std::size_t x) const;
  std::size_t encode (std::span<const int> q) const;
};

inline constexpr int kMaxOracleQueues = 4;
inline constexpr int kMaxOracleBound = 30;

// The policy must be stateless; randomized rules contribute mixture rows.
TruncatedChain build_chain (const ConflictGraph& g, const RateVector& lambda, const Policy& policy, int B);

// Largest deviation of a row sum from 1.
double max_row_error (const TruncatedChain& c);

struct StationaryOptions
{
  double tol = 1e-10;
  std::size_t max_iter = 500000;
};

std::vector<double> stationary (const TruncatedChain& c, StationaryOptions opt = {});

double probability (const TruncatedChain& c, const std::vector<double>& pi,
                    const std::function<bool (const std::vector<int>&)>& event);
double offered_probability (const TruncatedChain& c, const std::vector<double>& pi, int queue);

struct FormulaRow
{
  std::string quantity;
  double formula;
  double oracle;
  double delta () const { return formula > oracle ? formula - oracle : oracle - formula; }
};

// Closed forms for the top-down policies: 3 queues (backlog marginals,
// joint emptiness, indicator independence, offered service to queue 3) or
// 4 queues (offered service to queue 4).
std::vector<FormulaRow> verify_formulas (const TruncatedChain& c, const std::vector<double>& pi);

// E[(A - B)^+] by exhaustive summation over two independent pmfs on 0..K.
double truncated_difference (const std::vector<double>& pmf_a, const std::vector<double>& pmf_b);
// Bernoulli(b) subtrahend: E[A] - b (1 - P{A = 0}).
double truncated_difference_formula (const std::vector<double>& pmf_a, double b);
std::vector<double> binomial_pmf (int k, double p);

} // namespace qnb
