// policy.cpp

#include "qnb/policy.hpp"

#include "qnb/coc_policies.hpp"
#include "qnb/path_policies.hpp"

#include <algorithm>
#include <sstream>

namespace qnb {

std::string
to_string (InfoClass c)
{
  switch (c)
    {
    case InfoClass::occupancy_only:
      return "occupancy_only";
    case InfoClass::full_state:
      return "full_state";
    case InfoClass::randomized_occupancy:
      return "randomized_occupancy";
    case InfoClass::framed:
      return "framed";
    case InfoClass::channel_sensing:
      return "channel_sensing";
    }
  return "?";
}

std::optional<double>
PolicySpec::param (const std::string& key) const
{
  auto it = params.find (key);
  if (it == params.end ())
    return std::nullopt;
  return it->second;
}

std::string
PolicySpec::label () const
{
  std::ostringstream os;
  os << name;
  if (!inner.empty ())
    os << "(" << inner.front ().label () << ")";
  if (!params.empty ())
    {
      os << "{";
      bool first = true;
      for (const auto& [k, v] : params)
        {
          os << (first ? "" : ",") << k << "=" << v;
          first = false;
        }
      os << "}";
    }
  return os.str ();
}

std::vector<WeightedActivation>
Policy::decision_distribution (const Observation& obs) const
{
  if (m_info == InfoClass::randomized_occupancy || !is_stateless ())
    throw ContractError ("policy " + m_name + " has no closed-form decision law");
  auto copy = clone ();
  Rng unused;
  return {WeightedActivation{1.0, copy->decide (obs, unused)}};
}

std::vector<std::string>
policy_catalog ()
{
  auto a = path_policy_names ();
  auto b = coc_policy_names ();
  a.insert (a.end (), b.begin (), b.end ());
  return a;
}

PolicyPtr
make_policy (const PolicySpec& spec, const ConflictGraph& g)
{
  auto path = path_policy_names ();
  auto coc = coc_policy_names ();
  bool is_path_name = std::find (path.begin (), path.end (), spec.name) != path.end ();
  bool is_coc_name = std::find (coc.begin (), coc.end (), spec.name) != coc.end ();

  // MaxWeight lives with the path rules but accepts every graph kind.
  if (is_path_name)
    return make_path_policy (spec, g);
  if (is_coc_name)
    return make_coc_policy (spec, g);
  throw ConfigError ("unknown policy: " + spec.name);
}

} // namespace qnb
