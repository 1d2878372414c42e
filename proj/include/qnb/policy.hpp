// policy.hpp
//
// Uniform policy interface and the catalog constructor shared by the path
// and cluster-of-cliques families.

#pragma once

#include "qnb/arrivals.hpp"
#include "qnb/model.hpp"

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qnb {

enum class InfoClass
{
  occupancy_only,
  full_state,
  randomized_occupancy,
  framed,
  channel_sensing
};

std::string to_string (InfoClass c);

// What a policy sees at slot t (state measured just after arrivals).
struct Observation
{
  std::span<const std::int64_t> backlog;
  OccupancyVector zeta;
  std::uint64_t slot = 0;
};

struct WeightedActivation
{
  double prob;
  ActivationVector s;
};

// Catalog entry: a name plus numeric parameters and an optional inner policy
// (used by L_of).
struct PolicySpec
{
  std::string name;
  std::map<std::string, double> params;
  std::vector<PolicySpec> inner; // zero or one element

  PolicySpec () = default;
  explicit PolicySpec (std::string n, std::map<std::string, double> p = {})
    : name (std::move (n)), params (std::move (p))
  {
  }
  static PolicySpec wrap (std::string n, PolicySpec in)
  {
    PolicySpec s (std::move (n));
    s.inner.push_back (std::move (in));
    return s;
  }

  std::optional<double> param (const std::string& key) const;
  std::string label () const;
};

class Policy
{
public:
  Policy (std::string name, InfoClass info, ConflictGraph graph)
    : m_name (std::move (name)), m_info (info), m_graph (std::move (graph))
  {
  }
  virtual ~Policy () = default;

  const std::string& name () const { return m_name; }
  InfoClass info_class () const { return m_info; }
  const ConflictGraph& graph () const { return m_graph; }

  virtual ActivationVector decide (const Observation& obs, Rng& rng) = 0;

  // Clears internal state (frames, sensing counters, selectors).
  virtual void reset () {}
  virtual std::unique_ptr<Policy> clone () const = 0;

  // Decisions depend only on the current observation (and policy draws).
  virtual bool is_stateless () const { return true; }

  // Law of the decision for a given observation. Deterministic policies
  // return a single atom; randomized ones override.
  virtual std::vector<WeightedActivation> decision_distribution (const Observation& obs) const;

  // "proved" or "conjectured" throughput optimality, or "none" when the
  // policy is a baseline or a known counterexample.
  virtual std::string throughput_claim () const { return "proved"; }

private:
  std::string m_name;
  InfoClass m_info;
  ConflictGraph m_graph;
};

using PolicyPtr = std::unique_ptr<Policy>;

// Dispatches to the path or cluster-of-cliques catalog.
PolicyPtr make_policy (const PolicySpec& spec, const ConflictGraph& g);
std::vector<std::string> policy_catalog ();

} // namespace qnb
