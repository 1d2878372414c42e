// coc_policies.hpp
//
// Star-of-Cliques and Linear-Array-of-Cliques policies. Decisions are made
// at clique level and then mapped to one queue per selected clique.

#pragma once

#include "qnb/policy.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qnb {

struct CliqueObservation
{
  OccupancyVector zeta; // per queue
  OccupancyVector I;    // per clique: some member nonempty

  std::uint64_t nonempty_in (const ConflictGraph& g, int c) const { return zeta.mask () & g.clique_mask (c); }
};

CliqueObservation observe_cliques (const ConflictGraph& g, const OccupancyVector& zeta);

// Picks one queue inside a clique among an eligible set.
class CliqueSelector
{
public:
  enum class Mode
  {
    round_robin,
    lowest_index
  };

  CliqueSelector () = default;
  explicit CliqueSelector (const ConflictGraph& g, Mode mode = Mode::round_robin);

  // Returns the chosen queue, or -1 when no queue of clique c is eligible.
  int pick (int c, std::uint64_t eligible);
  void reset ();

private:
  Mode m_mode = Mode::round_robin;
  std::vector<int> m_begin;
  std::vector<int> m_size;
  std::vector<int> m_next; // per clique, queue index to try first
};

enum class SocRule
{
  phi_ic,
  phi_ic_tilde
};

enum class LaocRule
{
  theta3_td,
  theta3_bu,
  theta5_sp
};

// Clique-level rules on the clique occupancy I.
ActivationVector soc_cliques (SocRule rule, const OccupancyVector& I);
// theta5_sp accepts 4 cliques by appending an empty fifth one.
ActivationVector laoc_cliques (LaocRule rule, const OccupancyVector& I);

// Clique decision turned into an activation: one nonempty queue per
// selected clique, or the first queue of an empty selected clique (offered
// service, no departure).
ActivationVector materialize (const ConflictGraph& g, const CliqueObservation& obs, const ActivationVector& cliques,
                              CliqueSelector& sel);

ActivationVector decide_soc (SocRule rule, const ConflictGraph& g, const CliqueObservation& obs, CliqueSelector& sel);
ActivationVector decide_laoc (LaocRule rule, const ConflictGraph& g, const CliqueObservation& obs, CliqueSelector& sel);

// Packets present at the frame boundary are the only ones served in a frame.
struct FrameState
{
  int T = 1;
  std::vector<std::int64_t> snapshot;
  std::uint64_t frame = 0;
};

enum class FramedRule
{
  phi_ic_T,
  theta3_td_T,
  theta3_bu_T
};

// Refreshes the snapshot when t is a multiple of T, picks the activation
// and charges the served packets to the snapshot.
ActivationVector step_framed (FramedRule rule, const ConflictGraph& g, FrameState& state,
                              std::span<const std::int64_t> backlog, std::uint64_t t, CliqueSelector& sel);

// senders[m] lists what was heard in minislot m+1: queue indices, except
// the second minislot of the three-minislot protocol which lists cliques.
struct MinislotLog
{
  std::vector<std::vector<int>> senders;
  bool power (int m) const { return !senders[static_cast<std::size_t> (m)].empty (); }
};

struct SensingState
{
  std::vector<int> incumbent;      // per clique; unused for the centre
  std::vector<std::int64_t> V;     // per queue, slots since last grant
  static SensingState initial (const ConflictGraph& g);
};

struct SensingStep
{
  ActivationVector s;
  MinislotLog log;
};

// Channel-sensing policy on a star whose centre is a single queue.
SensingStep step_channel_sensing (const ConflictGraph& g, SensingState& state, const OccupancyVector& zeta);

// Three-minislot realization of the inner-clique-tilde rule; queues are
// chosen by lowest index inside each clique.
SensingStep decide_soc_tilde_minislot (const ConflictGraph& g, const CliqueObservation& obs);

std::vector<std::string> coc_policy_names ();
PolicyPtr make_coc_policy (const PolicySpec& spec, const ConflictGraph& g);

} // namespace qnb
