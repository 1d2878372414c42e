// experiment.hpp
//
// JSON experiment configs, sweeps, CSV output and the named reproduction
// recipes used by the command-line tool.

#pragma once

#include "qnb/engine.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace qnb {

using Json = nlohmann::json;

struct ExperimentConfig
{
  Json source; // as parsed, used for the config hash
  ConflictGraph graph = ConflictGraph::path (1);
  std::string arrival_kind = "bernoulli";
  std::vector<double> rates;   // base rates; scaled by s in an s-sweep
  double markov_p = 0.1;       // Markov arrivals built from rates
  std::vector<double> p, q;    // explicit Markov chains (no rates)
  std::vector<PolicySpec> policies;
  std::string sweep_variable;  // "", "s", "gamma" or "T"
  std::vector<double> sweep_values;
  std::uint64_t horizon = 1000000;
  std::int64_t warmup = -1;
  int seeds = 10;
  std::uint64_t seed = 1;
  Monitors monitors;
  std::string output;
  std::string trace;
  std::uint64_t trace_slots = 0;
  int truncation = 25;
};

ConflictGraph parse_graph (const Json& j);
PolicySpec parse_policy (const Json& j);
ExperimentConfig parse_config (const Json& j);
ExperimentConfig load_config (const std::string& path);

// 64-bit FNV-1a of the compact JSON dump, as 16 hex digits.
std::string config_hash (const Json& j);

// Arrival spec at one sweep point (s scales the base rates).
ArrivalSpec arrivals_at (const ExperimentConfig& c, double s);

// Policies whose definition guarantees the monitored property.
bool contract_property_P (const std::string& policy);
bool contract_msm (const std::string& policy);

struct RunRow
{
  double sweep_value = 0.0;
  std::string policy;
  std::string claim;
  std::uint64_t seed = 0;
  std::vector<double> rates;
  double load = 0.0;
  bool in_region = true;
  Metrics metrics;
  Verdict verdict = Verdict::inconclusive;
};

struct ExperimentReport
{
  std::string hash;
  std::string sweep_variable;
  std::vector<std::string> header;
  std::vector<RunRow> rows;
  std::vector<std::string> warnings;
  bool contract_violation = false;

  // Seed-averaged mean sum backlog for one policy label and sweep value.
  double mean_backlog (const std::string& policy, double sweep_value = 1.0) const;
  std::vector<const RunRow*> select (const std::string& policy, double sweep_value = 1.0) const;
};

// Cartesian product of sweep point x policy x seed. Every policy at a
// given (point, seed) sees the same arrivals.
ExperimentReport run_experiment (const ExperimentConfig& c);
void write_csv (const ExperimentReport& r, std::ostream& os);

struct Check
{
  std::string name;
  bool pass;
  std::string detail;
};

struct RecipeOptions
{
  std::uint64_t horizon = 1000000;
  int seeds = 10;
  std::uint64_t seed = 1;
  std::int64_t warmup = -1;
};

struct RecipeReport
{
  std::string recipe;
  std::vector<std::string> header;
  std::vector<Check> checks;
  std::vector<ExperimentReport> parts;
  bool passed () const;
};

std::vector<std::string> recipe_names ();
RecipeReport reproduce (const std::string& recipe, const RecipeOptions& opt);
void write_recipe (const RecipeReport& r, std::ostream& os);

// Exhaustive MSM check of every MSM-claimed path policy on Path(n).
std::vector<Check> verify_msm (int n);

// Oracle run described by a config: formula rows for the first policy.
std::vector<Check> oracle_checks (const ExperimentConfig& c, std::ostream* csv);

} // namespace qnb
