// test_model.cpp

#include "qnb/model.hpp"

#include <doctest.h>

using namespace qnb;

namespace {

ActivationVector
act (const char* s)
{
  return ActivationVector::from_string (s);
}

// Independent check: no two offered queues conflict.
bool
valid_by_pairs (const ConflictGraph& g, const ActivationVector& s)
{
  for (int i = 0; i < g.total_queues (); ++i)
    for (int j = i + 1; j < g.total_queues (); ++j)
      if (s[i] && s[j] && g.adjacent (i, j))
        return false;
  return true;
}

} // namespace

TEST_CASE ("bit vectors round trip through strings")
{
  auto v = OccupancyVector::from_string ("0110");
  CHECK (v.size () == 4);
  CHECK (v.count () == 2);
  CHECK (v[1]);
  CHECK_FALSE (v[0]);
  CHECK (v.to_string () == "0110");
  CHECK (v.reversed ().to_string () == "0110");
  CHECK (OccupancyVector::from_string ("1100").reversed ().to_string () == "0011");
  CHECK (OccupancyVector ({1, 0, 1}).to_string () == "101");
  CHECK_THROWS_AS (OccupancyVector::from_string ("01x"), ConfigError);
  CHECK_THROWS_AS (OccupancyVector (65), DimensionError);
}

TEST_CASE ("activation validity on paths")
{
  CHECK (is_activation_valid (ConflictGraph::path (3), act ("101")));
  CHECK_FALSE (is_activation_valid (ConflictGraph::path (3), act ("110")));
  CHECK (is_activation_valid (ConflictGraph::path (4), act ("1001")));
  CHECK_THROWS_AS (is_activation_valid (ConflictGraph::path (3), act ("1010")), DimensionError);
}

TEST_CASE ("adjacency of cluster-of-cliques graphs")
{
  auto soc = ConflictGraph::star_of_cliques ({1, 2, 2});
  CHECK (soc.total_queues () == 5);
  CHECK (soc.adjacent (0, 1));
  CHECK (soc.adjacent (0, 4));
  CHECK (soc.adjacent (1, 2));
  CHECK_FALSE (soc.adjacent (1, 3));
  CHECK (soc.clique_of (3) == 2);
  CHECK (soc.describe () == "star_of_cliques(1,2,2)");

  auto laoc = ConflictGraph::linear_array_of_cliques ({2, 1, 2});
  CHECK (laoc.adjacent (0, 2));
  CHECK (laoc.adjacent (2, 4));
  CHECK_FALSE (laoc.adjacent (0, 3));

  auto k = ConflictGraph::clique (3);
  CHECK (k.adjacent (0, 2));
  CHECK_FALSE (is_activation_valid (k, act ("101")));
}

TEST_CASE ("activation validity agrees with the pairwise definition")
{
  std::vector<ConflictGraph> graphs{ConflictGraph::path (5), ConflictGraph::star_of_cliques ({1, 2, 2}),
                                    ConflictGraph::linear_array_of_cliques ({2, 1, 2}), ConflictGraph::clique (4)};
  for (const auto& g : graphs)
    for (std::uint64_t m = 0; m < (1u << g.total_queues ()); ++m)
      {
        ActivationVector s (g.total_queues (), m);
        CHECK (is_activation_valid (g, s) == valid_by_pairs (g, s));
      }
}

TEST_CASE ("capacity region tests")
{
  CHECK (in_capacity_region (ConflictGraph::path (3), {0.25, 0.74, 0.25}, true));
  CHECK_FALSE (in_capacity_region (ConflictGraph::path (3), {0.5, 0.5, 0.5}, true));
  CHECK (in_capacity_region (ConflictGraph::path (3), {0.5, 0.5, 0.5}, false));
  CHECK (in_capacity_region (ConflictGraph::star_of_cliques ({1, 1, 1}), {0.2, 0.5, 0.5}, true));
  CHECK_FALSE (in_capacity_region (ConflictGraph::star_of_cliques ({1, 2}), {0.2, 0.5, 0.5}, true));
  CHECK (region_load (ConflictGraph::linear_array_of_cliques ({2, 1, 2}), {0.1, 0.1, 0.5, 0.2, 0.2}) ==
         doctest::Approx (0.9));
  CHECK_THROWS_AS (in_capacity_region (ConflictGraph::path (3), {0.1, 0.1}, true), DimensionError);
}

TEST_CASE ("gamma inner bound")
{
  CHECK (in_gamma_inner_bound ({0.2, 0.2, 0.2}, 0.5));
  CHECK_FALSE (in_gamma_inner_bound ({0.3, 0.3, 0.3}, 0.5));
  CHECK (in_gamma_inner_bound ({0.25, 0.74, 0.25}, 1.0));
  CHECK_THROWS (in_gamma_inner_bound ({0.2, 0.2, 0.2}, 0.0));
}

TEST_CASE ("occupancy and rate vectors")
{
  CHECK (occupancy_of (QueueState ({0, 3, 1})).to_string () == "011");
  CHECK (occupancy_of (QueueState ({0, 0, 0})).to_string () == "000");
  CHECK (occupancy_of (QueueState ({5, 0, 0, 2})).to_string () == "1001");
  CHECK_THROWS (QueueState ({1, -1}));
  CHECK_THROWS (RateVector ({0.5, 1.2}));
  CHECK (RateVector ({0.2, 0.3}).total () == doctest::Approx (0.5));

  auto g = ConflictGraph::path (3);
  auto r = at_load (g, {0.25, 0.74, 0.25}, 0.9);
  CHECK (region_load (g, r) == doctest::Approx (0.9));
  CHECK (r[0] / r[1] == doctest::Approx (0.25 / 0.74));
}
