// coc_policies.cpp

#include "qnb/coc_policies.hpp"

#include "qnb/matching.hpp"
#include "qnb/path_policies.hpp"

#include <algorithm>
#include <bit>

namespace qnb {

CliqueObservation
observe_cliques (const ConflictGraph& g, const OccupancyVector& zeta)
{
  if (zeta.size () != g.total_queues ())
    throw DimensionError ("occupancy length does not match graph");
  CliqueObservation o{zeta, OccupancyVector (g.num_cliques ())};
  for (int c = 0; c < g.num_cliques (); ++c)
    o.I.set (c, (zeta.mask () & g.clique_mask (c)) != 0);
  return o;
}

CliqueSelector::CliqueSelector (const ConflictGraph& g, Mode mode)
  : m_mode (mode)
{
  for (int c = 0; c < g.num_cliques (); ++c)
    {
      m_begin.push_back (g.clique_begin (c));
      m_size.push_back (g.clique_size (c));
    }
  reset ();
}

void
CliqueSelector::reset ()
{
  m_next = m_begin;
}

int
CliqueSelector::pick (int c, std::uint64_t eligible)
{
  auto u = static_cast<std::size_t> (c);
  int b = m_begin[u];
  int n = m_size[u];
  std::uint64_t in_clique = (n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1)) << b;
  eligible &= in_clique;
  if (eligible == 0)
    return -1;
  if (m_mode == Mode::lowest_index)
    return std::countr_zero (eligible);
  // First eligible queue at or after the cursor, cyclically.
  int start = m_next[u];
  for (int k = 0; k < n; ++k)
    {
      int i = b + (start - b + k) % n;
      if ((eligible >> i) & 1u)
        {
          m_next[u] = b + (i - b + 1) % n;
          return i;
        }
    }
  return -1;
}

ActivationVector
soc_cliques (SocRule rule, const OccupancyVector& I)
{
  int m = I.size ();
  if (m < 2)
    throw DimensionError ("star of cliques needs a centre and at least one peripheral clique");
  ActivationVector s (m);
  bool all_periph = true;
  for (int c = 1; c < m; ++c)
    all_periph = all_periph && I[c];
  auto peripherals = [&] {
    for (int c = 1; c < m; ++c)
      s.set (c, I[c]);
  };
  if (rule == SocRule::phi_ic_tilde && all_periph)
    peripherals ();
  else if (I[0])
    s.set (0);
  else
    peripherals ();
  return s;
}

namespace {

ActivationVector
theta5 (const OccupancyVector& I)
{
  auto pick = [] (int a, int b) {
    ActivationVector s (5);
    s.set (a);
    s.set (b);
    return s;
  };
  if (I[2])
    {
      ActivationVector s (5);
      s.set (2);
      if (I[0] || I[4])
        {
          s.set (0);
          s.set (4);
        }
      return s;
    }
  if (I[1] && I[3])
    return pick (1, 3);
  if (I[1] && I[4])
    return pick (1, 4);
  if (I[3] && I[0])
    return pick (0, 3);
  return pick (0, 4);
}

} // namespace

ActivationVector
laoc_cliques (LaocRule rule, const OccupancyVector& I)
{
  switch (rule)
    {
    case LaocRule::theta3_td:
    case LaocRule::theta3_bu:
      if (I.size () != 3)
        throw DimensionError ("three-clique rule needs 3 cliques");
      return rule == LaocRule::theta3_td ? decide_generic_td (I) : decide_generic_bu (I);
    case LaocRule::theta5_sp:
      if (I.size () == 5)
        return theta5 (I);
      if (I.size () == 4)
        {
          auto s = theta5 (OccupancyVector (5, I.mask ()));
          return ActivationVector (4, s.mask ());
        }
      throw DimensionError ("five-clique rule needs 4 or 5 cliques");
    }
  return ActivationVector (I.size ());
}

ActivationVector
materialize (const ConflictGraph& g, const CliqueObservation& obs, const ActivationVector& cliques,
             CliqueSelector& sel)
{
  if (cliques.size () != g.num_cliques ())
    throw DimensionError ("clique decision length does not match graph");
  ActivationVector s (g.total_queues ());
  for (int c = 0; c < g.num_cliques (); ++c)
    {
      if (!cliques[c])
        continue;
      int i = sel.pick (c, obs.nonempty_in (g, c));
      s.set (i >= 0 ? i : g.clique_begin (c));
    }
  return s;
}

ActivationVector
decide_soc (SocRule rule, const ConflictGraph& g, const CliqueObservation& obs, CliqueSelector& sel)
{
  if (g.kind () != GraphKind::star_of_cliques)
    throw ConfigError ("star-of-cliques rule on " + g.describe ());
  return materialize (g, obs, soc_cliques (rule, obs.I), sel);
}

ActivationVector
decide_laoc (LaocRule rule, const ConflictGraph& g, const CliqueObservation& obs, CliqueSelector& sel)
{
  if (g.kind () != GraphKind::linear_array_of_cliques)
    throw ConfigError ("linear-array rule on " + g.describe ());
  return materialize (g, obs, laoc_cliques (rule, obs.I), sel);
}

ActivationVector
step_framed (FramedRule rule, const ConflictGraph& g, FrameState& state, std::span<const std::int64_t> backlog,
             std::uint64_t t, CliqueSelector& sel)
{
  if (state.T < 1)
    throw ConfigError ("frame length must be at least 1");
  if (static_cast<int> (backlog.size ()) != g.total_queues ())
    throw DimensionError ("backlog length does not match graph");
  if (t % static_cast<std::uint64_t> (state.T) == 0 || state.snapshot.size () != backlog.size ())
    {
      state.snapshot.assign (backlog.begin (), backlog.end ());
      state.frame = t / static_cast<std::uint64_t> (state.T);
    }

  std::uint64_t eligible = 0;
  for (std::size_t i = 0; i < state.snapshot.size (); ++i)
    if (state.snapshot[i] > 0)
      eligible |= std::uint64_t{1} << i;
  auto has = [&] (int c) { return (eligible & g.clique_mask (c)) != 0; };

  ActivationVector s (g.total_queues ());
  auto serve = [&] (int c) {
    int i = sel.pick (c, eligible);
    if (i >= 0)
      s.set (i);
  };

  switch (rule)
    {
    case FramedRule::phi_ic_T:
      if (g.kind () != GraphKind::star_of_cliques)
        throw ConfigError ("phi_ic_T needs a star of cliques");
      if (has (0))
        serve (0);
      else
        for (int c = 1; c < g.num_cliques (); ++c)
          serve (c);
      break;
    case FramedRule::theta3_td_T:
    case FramedRule::theta3_bu_T:
      {
        if (g.kind () != GraphKind::linear_array_of_cliques || g.num_cliques () != 3)
          throw ConfigError ("framed three-clique rule needs a 3-clique linear array");
        int first = rule == FramedRule::theta3_td_T ? 0 : 2;
        int other = 2 - first;
        if (has (first))
          {
            serve (first);
            serve (other);
          }
        else if (has (1))
          serve (1);
        else
          serve (other);
        break;
      }
    }

  for (int i = 0; i < g.total_queues (); ++i)
    if (s[i])
      --state.snapshot[static_cast<std::size_t> (i)];
  return s;
}

SensingState
SensingState::initial (const ConflictGraph& g)
{
  SensingState st;
  for (int c = 0; c < g.num_cliques (); ++c)
    st.incumbent.push_back (g.clique_begin (c));
  for (int i = 0; i < g.total_queues (); ++i)
    st.V.push_back (i);
  return st;
}

SensingStep
step_channel_sensing (const ConflictGraph& g, SensingState& state, const OccupancyVector& zeta)
{
  if (g.kind () != GraphKind::star_of_cliques || g.clique_size (0) != 1)
    throw ConfigError ("channel sensing needs a star whose centre is one queue");
  if (zeta.size () != g.total_queues ())
    throw DimensionError ("occupancy length does not match graph");
  if (state.V.size () != static_cast<std::size_t> (g.total_queues ()))
    state = SensingState::initial (g);

  SensingStep out{ActivationVector (g.total_queues ()), MinislotLog{{{}, {}}}};
  std::vector<bool> granted (static_cast<std::size_t> (g.total_queues ()), false);
  int centre = g.clique_begin (0);

  if (zeta[centre])
    {
      out.s.set (centre);
      out.log.senders[0].push_back (centre);
      granted[static_cast<std::size_t> (centre)] = true;
    }
  else
    for (int c = 1; c < g.num_cliques (); ++c)
      {
        auto cu = static_cast<std::size_t> (c);
        int inc = state.incumbent[cu];
        if (zeta[inc])
          {
            out.log.senders[1].push_back (inc);
            out.s.set (inc);
            granted[static_cast<std::size_t> (inc)] = true;
            continue;
          }
        // Silent minislot 2: the longest-waiting queue takes over.
        int best = g.clique_begin (c);
        for (int i = best + 1; i < g.clique_begin (c) + g.clique_size (c); ++i)
          if (state.V[static_cast<std::size_t> (i)] > state.V[static_cast<std::size_t> (best)])
            best = i;
        state.incumbent[cu] = best;
        out.s.set (best);
        granted[static_cast<std::size_t> (best)] = true;
      }

  for (std::size_t i = 0; i < state.V.size (); ++i)
    state.V[i] = granted[i] ? 0 : state.V[i] + 1;
  return out;
}

SensingStep
decide_soc_tilde_minislot (const ConflictGraph& g, const CliqueObservation& obs)
{
  if (g.kind () != GraphKind::star_of_cliques)
    throw ConfigError ("minislot protocol needs a star of cliques");
  SensingStep out{ActivationVector (g.total_queues ()), MinislotLog{{{}, {}, {}}}};
  auto& log = out.log.senders;
  for (int c = 1; c < g.num_cliques (); ++c)
    {
      for (int i = g.clique_begin (c); i < g.clique_begin (c) + g.clique_size (c); ++i)
        if (!obs.zeta[i])
          log[0].push_back (i);
      if (!obs.I[c])
        log[1].push_back (c);
    }
  auto lowest = [&] (int c) { return std::countr_zero (obs.nonempty_in (g, c)); };
  if (!log[1].empty () && obs.I[0])
    log[2].push_back (lowest (0));
  else
    for (int c = 1; c < g.num_cliques (); ++c)
      if (obs.I[c])
        log[2].push_back (lowest (c));
  for (int i : log[2])
    out.s.set (i);
  return out;
}

namespace {

class SocPolicy : public Policy
{
public:
  SocPolicy (std::string name, ConflictGraph g, SocRule rule, CliqueSelector::Mode mode)
    : Policy (std::move (name), InfoClass::occupancy_only, std::move (g)), m_rule (rule), m_sel (graph (), mode)
  {
  }

  ActivationVector decide (const Observation& obs, Rng&) override
  {
    return decide_soc (m_rule, graph (), observe_cliques (graph (), obs.zeta), m_sel);
  }
  void reset () override { m_sel.reset (); }
  bool is_stateless () const override { return false; }
  std::unique_ptr<Policy> clone () const override { return std::make_unique<SocPolicy> (*this); }

private:
  SocRule m_rule;
  CliqueSelector m_sel;
};

class LaocPolicy : public Policy
{
public:
  LaocPolicy (std::string name, ConflictGraph g, LaocRule rule, bool projected, CliqueSelector::Mode mode)
    : Policy (std::move (name), InfoClass::occupancy_only, std::move (g)),
      m_rule (rule), m_projected (projected), m_sel (graph (), mode)
  {
  }

  ActivationVector decide (const Observation& obs, Rng&) override
  {
    auto co = observe_cliques (graph (), obs.zeta);
    auto cl = laoc_cliques (m_rule, co.I);
    if (m_projected)
      cl = project_L (co.I, cl);
    return materialize (graph (), co, cl, m_sel);
  }
  void reset () override { m_sel.reset (); }
  bool is_stateless () const override { return false; }
  std::unique_ptr<Policy> clone () const override { return std::make_unique<LaocPolicy> (*this); }

private:
  LaocRule m_rule;
  bool m_projected;
  CliqueSelector m_sel;
};

class FramedPolicy : public Policy
{
public:
  FramedPolicy (std::string name, ConflictGraph g, FramedRule rule, int T, CliqueSelector::Mode mode)
    : Policy (std::move (name), InfoClass::framed, std::move (g)), m_rule (rule), m_sel (graph (), mode)
  {
    m_state.T = T;
  }

  ActivationVector decide (const Observation& obs, Rng&) override
  {
    return step_framed (m_rule, graph (), m_state, obs.backlog, obs.slot, m_sel);
  }
  void reset () override
  {
    int T = m_state.T;
    m_state = FrameState{};
    m_state.T = T;
    m_sel.reset ();
  }
  bool is_stateless () const override { return false; }
  std::unique_ptr<Policy> clone () const override { return std::make_unique<FramedPolicy> (*this); }

private:
  FramedRule m_rule;
  FrameState m_state;
  CliqueSelector m_sel;
};

class ChannelSensingPolicy : public Policy
{
public:
  explicit ChannelSensingPolicy (ConflictGraph g)
    : Policy ("phi_cs", InfoClass::channel_sensing, std::move (g)), m_state (SensingState::initial (graph ()))
  {
  }

  ActivationVector decide (const Observation& obs, Rng&) override
  {
    return step_channel_sensing (graph (), m_state, obs.zeta).s;
  }
  void reset () override { m_state = SensingState::initial (graph ()); }
  bool is_stateless () const override { return false; }
  std::unique_ptr<Policy> clone () const override { return std::make_unique<ChannelSensingPolicy> (*this); }

private:
  SensingState m_state;
};

void
require (bool ok, const std::string& name, const ConflictGraph& g, const char* what)
{
  if (!ok)
    throw ConfigError ("policy " + name + " needs " + what + ", got " + g.describe ());
}

} // namespace

std::vector<std::string>
coc_policy_names ()
{
  return {"phi_ic",    "phi_ic_tilde", "phi_ic_T",  "phi_cs",      "theta3_td",
          "theta3_bu", "theta5_sp",    "theta5_m",  "theta3_td_T", "theta3_bu_T"};
}

PolicyPtr
make_coc_policy (const PolicySpec& spec, const ConflictGraph& g)
{
  const std::string& name = spec.name;
  auto mode = spec.param ("lowest_index").value_or (0.0) != 0.0 ? CliqueSelector::Mode::lowest_index
                                                                 : CliqueSelector::Mode::round_robin;
  bool soc = g.kind () == GraphKind::star_of_cliques;
  bool laoc = g.kind () == GraphKind::linear_array_of_cliques;
  auto frame = [&] {
    double T = spec.param ("T").value_or (1.0);
    if (!(T >= 1.0) || T != static_cast<double> (static_cast<int> (T)))
      throw ConfigError ("policy " + name + ": T must be a positive integer");
    return static_cast<int> (T);
  };

  if (name == "phi_ic" || name == "phi_ic_tilde")
    {
      require (soc, name, g, "a star of cliques");
      return std::make_unique<SocPolicy> (name, g, name == "phi_ic" ? SocRule::phi_ic : SocRule::phi_ic_tilde, mode);
    }
  if (name == "phi_ic_T")
    {
      require (soc, name, g, "a star of cliques");
      return std::make_unique<FramedPolicy> (name, g, FramedRule::phi_ic_T, frame (), mode);
    }
  if (name == "phi_cs")
    {
      require (soc && g.clique_size (0) == 1, name, g, "a star whose centre is one queue");
      return std::make_unique<ChannelSensingPolicy> (g);
    }
  if (name == "theta3_td" || name == "theta3_bu")
    {
      require (laoc && g.num_cliques () == 3, name, g, "a 3-clique linear array");
      return std::make_unique<LaocPolicy> (name, g, name == "theta3_td" ? LaocRule::theta3_td : LaocRule::theta3_bu,
                                           false, mode);
    }
  if (name == "theta5_sp" || name == "theta5_m")
    {
      require (laoc && (g.num_cliques () == 5 || g.num_cliques () == 4), name, g, "a 4- or 5-clique linear array");
      return std::make_unique<LaocPolicy> (name, g, LaocRule::theta5_sp, name == "theta5_m", mode);
    }
  if (name == "theta3_td_T" || name == "theta3_bu_T")
    {
      require (laoc && g.num_cliques () == 3, name, g, "a 3-clique linear array");
      return std::make_unique<FramedPolicy> (
          name, g, name == "theta3_td_T" ? FramedRule::theta3_td_T : FramedRule::theta3_bu_T, frame (), mode);
    }
  throw ConfigError ("unknown policy: " + name);
}

} // namespace qnb
