// qnb_cli.cpp
//
// Command-line front end: simulate, sweep, compare, verify-msm, oracle,
// reproduce.

#include "qnb/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>

namespace {

struct Overrides
{
  std::int64_t horizon = -1;
  int seeds = -1;
  std::int64_t warmup = -2;
  std::string out;
  std::string trace;
};

void
apply (qnb::ExperimentConfig& c, const Overrides& o)
{
  if (o.horizon > 0)
    c.horizon = static_cast<std::uint64_t> (o.horizon);
  if (o.seeds > 0)
    c.seeds = o.seeds;
  if (o.warmup >= -1)
    c.warmup = o.warmup;
  if (!o.out.empty ())
    c.output = o.out;
  if (!o.trace.empty ())
    {
      c.trace = o.trace;
      if (c.trace_slots == 0)
        c.trace_slots = 1000;
    }
}

// Writes to the named file, or stdout when the name is empty.
template <class F>
void
emit (const std::string& path, F&& write)
{
  if (path.empty ())
    {
      write (std::cout);
      return;
    }
  std::ofstream f (path);
  if (!f)
    throw qnb::ConfigError ("cannot write " + path);
  write (f);
}

void
summarize (const qnb::ExperimentReport& r)
{
  std::map<std::pair<double, std::string>, std::pair<double, int>> acc;
  std::map<std::pair<double, std::string>, int> stable;
  for (const auto& row : r.rows)
    {
      auto key = std::make_pair (row.sweep_value, row.policy);
      acc[key].first += row.metrics.mean_sum_backlog;
      acc[key].second += 1;
      stable[key] += row.verdict == qnb::Verdict::stable;
    }
  std::cerr << std::left << std::setw (10) << r.sweep_variable << std::setw (44) << "policy" << std::setw (16)
            << "mean_sum_Q" << "stable" << '\n';
  for (const auto& [key, v] : acc)
    std::cerr << std::setw (10) << key.first << std::setw (44) << key.second << std::setw (16) << v.first / v.second
              << stable[key] << "/" << v.second << '\n';
  for (const auto& w : r.warnings)
    std::cerr << "warning: " << w << '\n';
}

int
run_config (const std::string& path, const Overrides& o, bool drop_sweep)
{
  auto c = qnb::load_config (path);
  if (drop_sweep)
    {
      c.sweep_variable.clear ();
      c.sweep_values.clear ();
    }
  apply (c, o);
  auto r = qnb::run_experiment (c);
  emit (c.output, [&] (std::ostream& os) { qnb::write_csv (r, os); });
  summarize (r);
  return r.contract_violation ? 1 : 0;
}

int
compare (const std::string& path, const Overrides& o)
{
  auto c = qnb::load_config (path);
  apply (c, o);
  auto r = qnb::run_experiment (c);
  emit (c.output, [&] (std::ostream& os) { qnb::write_csv (r, os); });
  summarize (r);
  // Per-seed ranking under common arrivals.
  std::map<std::pair<double, std::uint64_t>, std::vector<const qnb::RunRow*>> by_seed;
  for (const auto& row : r.rows)
    by_seed[{row.sweep_value, row.seed}].push_back (&row);
  std::map<std::pair<double, std::string>, int> wins;
  for (const auto& [key, rows] : by_seed)
    {
      const qnb::RunRow* best = rows.front ();
      for (const auto* row : rows)
        if (row->metrics.mean_sum_backlog < best->metrics.mean_sum_backlog)
          best = row;
      ++wins[{key.first, best->policy}];
    }
  for (const auto& [key, n] : wins)
    std::cerr << "best at " << r.sweep_variable << "=" << key.first << ": " << key.second << " in " << n << " seed(s)\n";
  return r.contract_violation ? 1 : 0;
}

int
print_checks (const std::vector<qnb::Check>& checks)
{
  bool ok = true;
  for (const auto& c : checks)
    {
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name;
      if (!c.detail.empty ())
        std::cout << " (" << c.detail << ")";
      std::cout << '\n';
      ok = ok && c.pass;
    }
  return ok ? 0 : 1;
}

} // namespace

int
main (int argc, char** argv)
{
  CLI::App app{"Queue-nonemptiness-based scheduling simulator"};
  app.require_subcommand (1);
  Overrides o;
  std::string config, recipe;
  int n = 0;

  auto add_flags = [&] (CLI::App* sub) {
    sub->add_option ("--horizon", o.horizon, "slots per run");
    sub->add_option ("--seeds", o.seeds, "seeds per point");
    sub->add_option ("--warmup", o.warmup, "slots excluded from averages (-1: 10% of horizon)");
    sub->add_option ("--out", o.out, "output CSV path");
    sub->add_option ("--trace", o.trace, "trace CSV path (first run)");
  };

  auto* simulate = app.add_subcommand ("simulate", "run a config at its base point");
  simulate->add_option ("config", config)->required ();
  add_flags (simulate);
  auto* sweep = app.add_subcommand ("sweep", "run a config over its sweep grid");
  sweep->add_option ("config", config)->required ();
  add_flags (sweep);
  auto* cmp = app.add_subcommand ("compare", "coupled comparison of the config's policies");
  cmp->add_option ("config", config)->required ();
  add_flags (cmp);
  auto* vmsm = app.add_subcommand ("verify-msm", "exhaustive MSM check on Path(N)");
  vmsm->add_option ("N", n)->required ()->check (CLI::Range (1, 20));
  auto* orc = app.add_subcommand ("oracle", "exact truncated-chain analysis");
  orc->add_option ("config", config)->required ();
  orc->add_option ("--out", o.out, "output CSV path");
  auto* rep = app.add_subcommand ("reproduce", "run a named recipe");
  rep->add_option ("recipe", recipe)->required ()->check (CLI::IsMember (qnb::recipe_names ()));
  add_flags (rep);

  CLI11_PARSE (app, argc, argv);

  try
    {
      if (*simulate)
        return run_config (config, o, true);
      if (*sweep)
        return run_config (config, o, false);
      if (*cmp)
        return compare (config, o);
      if (*vmsm)
        return print_checks (qnb::verify_msm (n));
      if (*orc)
        {
          auto c = qnb::load_config (config);
          std::vector<qnb::Check> checks;
          emit (o.out, [&] (std::ostream& os) { checks = qnb::oracle_checks (c, &os); });
          return print_checks (checks);
        }
      if (*rep)
        {
          qnb::RecipeOptions ro;
          if (o.horizon > 0)
            ro.horizon = static_cast<std::uint64_t> (o.horizon);
          if (o.seeds > 0)
            ro.seeds = o.seeds;
          if (o.warmup >= -1)
            ro.warmup = o.warmup;
          auto r = qnb::reproduce (recipe, ro);
          emit (o.out, [&] (std::ostream& os) { qnb::write_recipe (r, os); });
          return print_checks (r.checks);
        }
    }
  catch (const qnb::ConfigError& e)
    {
      std::cerr << "error: " << e.what () << '\n';
      return 2;
    }
  catch (const std::exception& e)
    {
      std::cerr << "error: " << e.what () << '\n';
      return 3;
    }
  return 0;
}
