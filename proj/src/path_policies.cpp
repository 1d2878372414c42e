// path_policies.cpp

#include "qnb/path_policies.hpp"

#include "qnb/matching.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace qnb {

namespace {

ActivationVector
bits (std::string_view s)
{
  auto o = OccupancyVector::from_string (s);
  return ActivationVector (o.size (), o.mask ());
}

void
require_size (const OccupancyVector& z, int n, const char* who)
{
  if (z.size () != n)
    throw DimensionError (std::string (who) + ": expected " + std::to_string (n) + " queues");
}

bool
is (const OccupancyVector& z, std::string_view pattern)
{
  return z == OccupancyVector::from_string (pattern);
}

} // namespace

ActivationVector
decide_three_queue (ThreeQueueRule rule, const OccupancyVector& z)
{
  require_size (z, 3, "decide_three_queue");
  switch (rule)
    {
    case ThreeQueueRule::td:
      return decide_generic_td (z);
    case ThreeQueueRule::bu:
      return decide_generic_bu (z);
    case ThreeQueueRule::iq_tilde:
      return z[1] && !(z[0] && z[2]) ? bits ("010") : bits ("101");
    case ThreeQueueRule::oq:
      return is (z, "010") ? bits ("010") : bits ("101");
    case ThreeQueueRule::iq:
      return z[1] ? bits ("010") : bits ("101");
    }
  return bits ("000");
}

ActivationVector
decide_rho3 (const OccupancyVector& z, double gamma, double u)
{
  require_size (z, 3, "decide_rho3");
  if (is (z, "110") || is (z, "011"))
    return u < gamma ? bits ("010") : bits ("101");
  // Remaining states follow the inner-priority table.
  return decide_three_queue (ThreeQueueRule::iq_tilde, z);
}

std::vector<WeightedActivation>
rho3_distribution (const OccupancyVector& z, double gamma)
{
  if (is (z, "110") || is (z, "011"))
    {
      std::vector<WeightedActivation> d;
      if (gamma > 0.0)
        d.push_back ({gamma, bits ("010")});
      if (gamma < 1.0)
        d.push_back ({1.0 - gamma, bits ("101")});
      return d;
    }
  return {{1.0, decide_rho3 (z, gamma, 0.0)}};
}

ActivationVector
decide_generic_td (const OccupancyVector& z)
{
  int n = z.size ();
  ActivationVector s (n);
  for (int j = 0; j < n; ++j)
    if (z[j] && (j == 0 || !s[j - 1]))
      s.set (j);
  for (int j = 0; j < n; ++j)
    if (!z[j] && (j == 0 || !s[j - 1]) && (j + 1 >= n || !s[j + 1]))
      s.set (j);
  return s;
}

ActivationVector
decide_generic_bu (const OccupancyVector& z)
{
  return decide_generic_td (z.reversed ()).reversed ();
}

ActivationVector
decide_spliced (const OccupancyVector& z)
{
  int m = z.size ();
  if (m % 2 == 0)
    throw DimensionError ("spliced policy needs an odd number of queues");
  int c = (m - 1) / 2; // queue N in 1-based labels
  ActivationVector s (m);
  if (z[c])
    s.set (c);
  for (int j = c - 1; j >= 0; --j)
    s.set (j, z[j] && !s[j + 1]);
  for (int j = c + 1; j < m; ++j)
    s.set (j, z[j] && !s[j - 1]);
  return s;
}

ActivationVector
decide_four_queue_td (const OccupancyVector& z)
{
  require_size (z, 4, "decide_four_queue_td");
  if (z[0])
    return z[2] ? bits ("1010") : bits ("1001");
  if (z[1])
    return bits ("0101");
  return z[2] ? bits ("1010") : bits ("1001");
}

ActivationVector
decide_four_queue_ti (const OccupancyVector& z)
{
  require_size (z, 4, "decide_four_queue_ti");
  if (z[1])
    return bits ("0101");
  if (z[2])
    return bits ("1010");
  return bits ("1001");
}

ActivationVector
decide_four_queue_tilde (int variant, const OccupancyVector& z)
{
  require_size (z, 4, "decide_four_queue_tilde");
  switch (variant)
    {
    case 1:
      if (is (z, "1110"))
        return bits ("1010");
      return decide_four_queue_ti (z);
    case 2:
      if (is (z, "0111"))
        return bits ("0101");
      if (z[2])
        return bits ("1010");
      if (z[1])
        return bits ("0101");
      return bits ("1001");
    case 3:
      return is (z, "1111") ? bits ("1010") : decide_four_queue_tilde (1, z);
    case 4:
      return is (z, "1111") ? bits ("0101") : decide_four_queue_tilde (2, z);
    default:
      throw ConfigError ("four-queue variant must be 1..4");
    }
}

ActivationVector
decide_five_queue_tilde (const OccupancyVector& z)
{
  require_size (z, 5, "decide_five_queue_tilde");
  if (is (z, "01110") || is (z, "11110") || is (z, "01111"))
    return bits ("01010");
  if (z[2])
    return bits ("10101");
  if (z[1] && z[3])
    return bits ("01010");
  if (z[1])
    return bits ("01001");
  if (z[3])
    return bits ("10010");
  return bits ("10101");
}

ActivationVector
decide_maxweight (std::span<const std::int64_t> q, const ConflictGraph& g, double alpha)
{
  if (!(alpha > 0.0))
    throw ConfigError ("MaxWeight exponent must be positive");
  int n = g.total_queues ();
  if (static_cast<int> (q.size ()) != n)
    throw DimensionError ("backlog length does not match graph");
  std::vector<double> w (static_cast<std::size_t> (n));
  for (int i = 0; i < n; ++i)
    {
      auto qi = q[static_cast<std::size_t> (i)];
      w[static_cast<std::size_t> (i)] = qi <= 0 ? 0.0 : (alpha == 1.0 ? static_cast<double> (qi) : std::pow (static_cast<double> (qi), alpha));
    }
  if (g.kind () == GraphKind::path)
    return mwis_path (w);

  // Cluster graphs: the best queue of each clique represents it.
  int nc = g.num_cliques ();
  std::vector<double> cw (static_cast<std::size_t> (nc), 0.0);
  std::vector<int> arg (static_cast<std::size_t> (nc), -1);
  for (int c = 0; c < nc; ++c)
    for (int i = g.clique_begin (c); i < g.clique_begin (c) + g.clique_size (c); ++i)
      if (w[static_cast<std::size_t> (i)] > cw[static_cast<std::size_t> (c)])
        {
          cw[static_cast<std::size_t> (c)] = w[static_cast<std::size_t> (i)];
          arg[static_cast<std::size_t> (c)] = i;
        }

  ActivationVector s (n);
  auto take = [&] (int c) {
    if (arg[static_cast<std::size_t> (c)] >= 0)
      s.set (arg[static_cast<std::size_t> (c)]);
  };
  switch (g.kind ())
    {
    case GraphKind::clique:
      take (0);
      break;
    case GraphKind::star_of_cliques:
      {
        double periph = 0.0;
        for (int c = 1; c < nc; ++c)
          periph += cw[static_cast<std::size_t> (c)];
        // Ties favour the central clique, as Queue 2 wins ties on Path(3).
        if (cw[0] >= periph)
          take (0);
        else
          for (int c = 1; c < nc; ++c)
            take (c);
        break;
      }
    case GraphKind::linear_array_of_cliques:
      {
        auto chosen = mwis_path (cw);
        for (int c = 0; c < nc; ++c)
          if (chosen[c])
            take (c);
        break;
      }
    case GraphKind::path:
      break;
    }
  return s;
}

namespace {

const ActivationVector&
random_tie_candidate (int k)
{
  static const ActivationVector c[3] = {bits ("1010"), bits ("0101"), bits ("1001")};
  return c[k];
}

// Distinct maximum-size restrictions of the three candidates.
std::vector<ActivationVector>
random_tie_choices (const OccupancyVector& z)
{
  require_size (z, 4, "msm_random_tie");
  std::vector<ActivationVector> best;
  int size = -1;
  for (int k = 0; k < 3; ++k)
    {
      auto r = served (random_tie_candidate (k), z);
      if (r.count () > size)
        {
          size = r.count ();
          best.clear ();
        }
      if (r.count () == size && std::find (best.begin (), best.end (), r) == best.end ())
        best.push_back (r);
    }
  return best;
}

} // namespace

ActivationVector
decide_msm_random_tie (const OccupancyVector& z, Rng& rng)
{
  auto choices = random_tie_choices (z);
  if (choices.size () == 1)
    return choices.front ();
  return choices[static_cast<std::size_t> (rng.below (choices.size ()))];
}

std::vector<WeightedActivation>
msm_random_tie_distribution (const OccupancyVector& z)
{
  auto choices = random_tie_choices (z);
  std::vector<WeightedActivation> d;
  for (const auto& c : choices)
    d.push_back ({1.0 / static_cast<double> (choices.size ()), c});
  return d;
}

namespace {

using Rule = std::function<ActivationVector (const OccupancyVector&)>;

// Deterministic occupancy-only policy. Small systems use a lookup table.
class OccupancyRulePolicy : public Policy
{
public:
  OccupancyRulePolicy (std::string name, ConflictGraph g, Rule rule, std::string claim)
    : Policy (std::move (name), InfoClass::occupancy_only, std::move (g)),
      m_rule (std::move (rule)), m_claim (std::move (claim))
  {
    int n = graph ().total_queues ();
    if (n <= 16)
      {
        m_table.reserve (std::size_t{1} << n);
        for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m)
          m_table.push_back (m_rule (OccupancyVector (n, m)));
      }
  }

  ActivationVector decide (const Observation& obs, Rng&) override
  {
    if (!m_table.empty ())
      return m_table[obs.zeta.mask ()];
    return m_rule (obs.zeta);
  }

  std::unique_ptr<Policy> clone () const override { return std::make_unique<OccupancyRulePolicy> (*this); }
  std::string throughput_claim () const override { return m_claim; }

private:
  Rule m_rule;
  std::string m_claim;
  std::vector<ActivationVector> m_table;
};

class Rho3Policy : public Policy
{
public:
  Rho3Policy (ConflictGraph g, double gamma)
    : Policy ("rho3_gamma", InfoClass::randomized_occupancy, std::move (g)), m_gamma (gamma)
  {
  }

  ActivationVector decide (const Observation& obs, Rng& rng) override
  {
    const auto& z = obs.zeta;
    if (is (z, "110") || is (z, "011"))
      return decide_rho3 (z, m_gamma, rng.uniform ());
    return decide_rho3 (z, m_gamma, 0.0);
  }

  std::vector<WeightedActivation> decision_distribution (const Observation& obs) const override
  {
    return rho3_distribution (obs.zeta, m_gamma);
  }

  std::unique_ptr<Policy> clone () const override { return std::make_unique<Rho3Policy> (*this); }
  std::string throughput_claim () const override { return m_gamma >= 1.0 ? "proved" : "inner_bound"; }

private:
  double m_gamma;
};

class RandomTiePolicy : public Policy
{
public:
  explicit RandomTiePolicy (ConflictGraph g)
    : Policy ("msm_random_tie", InfoClass::randomized_occupancy, std::move (g))
  {
  }

  ActivationVector decide (const Observation& obs, Rng& rng) override { return decide_msm_random_tie (obs.zeta, rng); }

  std::vector<WeightedActivation> decision_distribution (const Observation& obs) const override
  {
    return msm_random_tie_distribution (obs.zeta);
  }

  std::unique_ptr<Policy> clone () const override { return std::make_unique<RandomTiePolicy> (*this); }
  std::string throughput_claim () const override { return "none"; }
};

class MaxWeightPolicy : public Policy
{
public:
  MaxWeightPolicy (std::string name, ConflictGraph g, double alpha)
    : Policy (std::move (name), InfoClass::full_state, std::move (g)), m_alpha (alpha)
  {
  }

  ActivationVector decide (const Observation& obs, Rng&) override
  {
    return decide_maxweight (obs.backlog, graph (), m_alpha);
  }

  std::unique_ptr<Policy> clone () const override { return std::make_unique<MaxWeightPolicy> (*this); }

private:
  double m_alpha;
};

class ProjectedPolicy : public Policy
{
public:
  explicit ProjectedPolicy (PolicyPtr inner)
    : Policy ("L_of(" + inner->name () + ")", inner->info_class (), inner->graph ()), m_inner (std::move (inner))
  {
  }
  ProjectedPolicy (const ProjectedPolicy& o)
    : Policy (o), m_inner (o.m_inner->clone ())
  {
  }

  ActivationVector decide (const Observation& obs, Rng& rng) override
  {
    return project_L (obs.zeta, m_inner->decide (obs, rng));
  }

  std::vector<WeightedActivation> decision_distribution (const Observation& obs) const override
  {
    auto d = m_inner->decision_distribution (obs);
    for (auto& w : d)
      w.s = project_L (obs.zeta, w.s);
    return d;
  }

  void reset () override { m_inner->reset (); }
  bool is_stateless () const override { return m_inner->is_stateless (); }
  std::unique_ptr<Policy> clone () const override { return std::make_unique<ProjectedPolicy> (*this); }
  std::string throughput_claim () const override { return m_inner->throughput_claim (); }

private:
  PolicyPtr m_inner;
};

void
require_path (const ConflictGraph& g, int n, const std::string& name)
{
  if (g.kind () != GraphKind::path || (n > 0 && g.total_queues () != n))
    throw ConfigError ("policy " + name + " needs path(" + (n > 0 ? std::to_string (n) : std::string ("N")) + "), got " + g.describe ());
}

} // namespace

std::vector<std::string>
path_policy_names ()
{
  return {"pi3_td",       "pi3_bu",       "pi3_iq_tilde",  "pi3_oq",       "pi3_iq",       "rho3_gamma",
          "piN_td",       "piN_bu",       "spliced_sp",    "spliced_m",    "spliced_tilde", "pi4_td",
          "pi4_ti",       "pi4_tilde_1",  "pi4_tilde_2",   "pi4_tilde_3",  "pi4_tilde_4",   "pi5_m",
          "pi5_tilde",    "maxweight",    "maxweight_alpha", "L_of",       "msm_random_tie"};
}

PolicyPtr
make_path_policy (const PolicySpec& spec, const ConflictGraph& g)
{
  const std::string& name = spec.name;
  auto rule = [&] (Rule r, std::string claim = "proved") -> PolicyPtr {
    return std::make_unique<OccupancyRulePolicy> (name, g, std::move (r), std::move (claim));
  };
  auto three = [&] (ThreeQueueRule r, std::string claim = "proved") {
    require_path (g, 3, name);
    return rule ([r] (const OccupancyVector& z) { return decide_three_queue (r, z); }, std::move (claim));
  };

  if (name == "pi3_td")
    return three (ThreeQueueRule::td);
  if (name == "pi3_bu")
    return three (ThreeQueueRule::bu);
  if (name == "pi3_iq_tilde")
    return three (ThreeQueueRule::iq_tilde);
  if (name == "pi3_oq")
    return three (ThreeQueueRule::oq, "none");
  if (name == "pi3_iq")
    return three (ThreeQueueRule::iq);
  if (name == "rho3_gamma")
    {
      require_path (g, 3, name);
      double gamma = spec.param ("gamma").value_or (1.0);
      if (!(gamma >= 0.0 && gamma <= 1.0))
        throw ConfigError ("rho3_gamma: gamma must lie in [0,1]");
      return std::make_unique<Rho3Policy> (g, gamma);
    }
  if (name == "piN_td" || name == "piN_bu")
    {
      require_path (g, 0, name);
      std::string claim = g.total_queues () <= 5 ? "proved" : "conjectured";
      if (name == "piN_td")
        return rule (decide_generic_td, claim);
      return rule (decide_generic_bu, claim);
    }
  if (name == "spliced_sp" || name == "spliced_m" || name == "spliced_tilde")
    {
      require_path (g, 0, name);
      if (g.total_queues () % 2 == 0)
        throw ConfigError (name + " needs an odd number of queues");
      std::string claim = g.total_queues () <= 9 ? "proved" : "conjectured";
      if (name == "spliced_sp")
        return rule (decide_spliced, claim);
      if (name == "spliced_m")
        return rule ([] (const OccupancyVector& z) { return project_L (z, decide_spliced (z)); }, claim);
      return rule ([] (const OccupancyVector& z) { return refine_inner_priority (z, project_L (z, decide_spliced (z))); },
                   claim);
    }
  if (name == "pi4_td")
    {
      require_path (g, 4, name);
      return rule (decide_four_queue_td);
    }
  if (name == "pi4_ti")
    {
      require_path (g, 4, name);
      return rule (decide_four_queue_ti);
    }
  if (name.rfind ("pi4_tilde_", 0) == 0 && name.size () == 11)
    {
      require_path (g, 4, name);
      int v = name.back () - '0';
      if (v < 1 || v > 4)
        throw ConfigError ("unknown policy: " + name);
      return rule ([v] (const OccupancyVector& z) { return decide_four_queue_tilde (v, z); });
    }
  if (name == "pi5_m")
    {
      require_path (g, 5, name);
      return rule ([] (const OccupancyVector& z) { return project_L (z, decide_spliced (z)); });
    }
  if (name == "pi5_tilde")
    {
      require_path (g, 5, name);
      return rule ([] (const OccupancyVector& z) { return refine_inner_priority (z, project_L (z, decide_spliced (z))); });
    }
  if (name == "maxweight")
    return std::make_unique<MaxWeightPolicy> (name, g, 1.0);
  if (name == "maxweight_alpha")
    {
      double alpha = spec.param ("alpha").value_or (0.01);
      if (!(alpha > 0.0))
        throw ConfigError ("maxweight_alpha: alpha must be positive");
      return std::make_unique<MaxWeightPolicy> (name, g, alpha);
    }
  if (name == "L_of")
    {
      require_path (g, 0, name);
      if (spec.inner.size () != 1)
        throw ConfigError ("L_of needs exactly one inner policy");
      return std::make_unique<ProjectedPolicy> (make_policy (spec.inner.front (), g));
    }
  if (name == "msm_random_tie")
    {
      require_path (g, 4, name);
      return std::make_unique<RandomTiePolicy> (g);
    }
  throw ConfigError ("unknown policy: " + name);
}

} // namespace qnb
