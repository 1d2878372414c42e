// experiment.cpp

#include "qnb/experiment.hpp"

#include "qnb/matching.hpp"
#include "qnb/oracle.hpp"
#include "qnb/path_policies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

namespace qnb {

namespace {

bool
same_point (double a, double b)
{
  return std::abs (a - b) < 1e-12;
}

std::string
fmt (double x, int prec = 6)
{
  std::ostringstream os;
  os << std::setprecision (prec) << x;
  return os.str ();
}

std::string
join (const std::vector<double>& v, char sep = ';')
{
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size (); ++i)
    os << (i ? std::string (1, sep) : "") << std::setprecision (6) << v[i];
  return os.str ();
}

template <class T>
T
get_or (const Json& j, const char* key, T fallback)
{
  return j.contains (key) ? j.at (key).get<T> () : fallback;
}

bool
ends_with (const std::string& s, const std::string& suffix)
{
  return s.size () >= suffix.size () && s.compare (s.size () - suffix.size (), suffix.size (), suffix) == 0;
}

} // namespace

ConflictGraph
parse_graph (const Json& j)
{
  std::string kind = j.at ("kind").get<std::string> ();
  if (kind == "path")
    return ConflictGraph::path (j.at ("n").get<int> ());
  if (kind == "clique")
    return ConflictGraph::clique (j.at ("n").get<int> ());
  if (kind == "star_of_cliques" || kind == "soc")
    return ConflictGraph::star_of_cliques (j.at ("sizes").get<std::vector<int>> ());
  if (kind == "linear_array_of_cliques" || kind == "laoc")
    return ConflictGraph::linear_array_of_cliques (j.at ("sizes").get<std::vector<int>> ());
  throw ConfigError ("unknown graph kind: " + kind);
}

PolicySpec
parse_policy (const Json& j)
{
  if (j.is_string ())
    return PolicySpec (j.get<std::string> ());
  PolicySpec p (j.at ("name").get<std::string> ());
  for (const auto& [k, v] : j.items ())
    {
      if (k == "name")
        continue;
      if (k == "inner")
        p.inner.push_back (parse_policy (v));
      else if (v.is_number ())
        p.params[k] = v.get<double> ();
      else
        throw ConfigError ("policy parameter " + k + " must be numeric");
    }
  return p;
}

ExperimentConfig
parse_config (const Json& j)
{
  ExperimentConfig c;
  try
    {
      c.source = j;
      c.graph = parse_graph (j.at ("graph"));
      const Json& a = j.at ("arrivals");
      c.arrival_kind = get_or<std::string> (a, "kind", "bernoulli");
      if (c.arrival_kind != "bernoulli" && c.arrival_kind != "markov")
        throw ConfigError ("unknown arrival kind: " + c.arrival_kind);
      if (a.contains ("rates"))
        c.rates = a.at ("rates").get<std::vector<double>> ();
      if (c.arrival_kind == "markov")
        {
          if (a.contains ("p") && a.at ("p").is_array ())
            {
              c.p = a.at ("p").get<std::vector<double>> ();
              c.q = a.at ("q").get<std::vector<double>> ();
            }
          else
            c.markov_p = get_or<double> (a, "p", 0.1);
        }
      if (c.rates.empty () && c.p.empty ())
        throw ConfigError ("arrivals need rates (or explicit Markov p and q)");

      for (const auto& p : j.at ("policies"))
        c.policies.push_back (parse_policy (p));
      if (c.policies.empty ())
        throw ConfigError ("policy list is empty");

      if (j.contains ("sweep"))
        {
          const Json& s = j.at ("sweep");
          c.sweep_variable = s.at ("variable").get<std::string> ();
          c.sweep_values = s.at ("values").get<std::vector<double>> ();
          if (c.sweep_variable != "s" && c.sweep_variable != "gamma" && c.sweep_variable != "T")
            throw ConfigError ("sweep variable must be s, gamma or T");
          if (c.sweep_values.empty ())
            throw ConfigError ("sweep grid is empty");
          if (c.sweep_variable == "s" && c.rates.empty ())
            throw ConfigError ("an s-sweep needs base rates");
        }
      c.horizon = get_or<std::uint64_t> (j, "horizon", c.horizon);
      c.warmup = get_or<std::int64_t> (j, "warmup", c.warmup);
      c.seeds = get_or<int> (j, "seeds", c.seeds);
      c.seed = get_or<std::uint64_t> (j, "seed", c.seed);
      c.output = get_or<std::string> (j, "output", "");
      c.trace = get_or<std::string> (j, "trace", "");
      c.trace_slots = get_or<std::uint64_t> (j, "trace_slots", c.trace.empty () ? 0 : 1000);
      c.truncation = get_or<int> (j, "truncation", c.truncation);
      if (j.contains ("monitors"))
        for (const auto& m : j.at ("monitors"))
          {
            auto name = m.get<std::string> ();
            if (name == "property_P")
              c.monitors.property_P = true;
            else if (name == "msm" || name == "msm_every_slot")
              c.monitors.msm = true;
            else if (name == "activation_valid")
              c.monitors.activation_valid = true;
            else
              throw ConfigError ("unknown monitor: " + name);
          }
      if (c.seeds < 1)
        throw ConfigError ("seeds must be positive");
    }
  catch (const nlohmann::json::exception& e)
    {
      throw ConfigError (std::string ("config: ") + e.what ());
    }

  // Every policy must accept the graph.
  for (const auto& p : c.policies)
    (void) make_policy (p, c.graph);
  return c;
}

ExperimentConfig
load_config (const std::string& path)
{
  std::ifstream in (path);
  if (!in)
    throw ConfigError ("cannot open config " + path);
  Json j;
  try
    {
      j = Json::parse (in);
    }
  catch (const nlohmann::json::exception& e)
    {
      throw ConfigError ("parse error in " + path + ": " + e.what ());
    }
  return parse_config (j);
}

std::string
config_hash (const Json& j)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump ())
    {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  char buf[17];
  std::snprintf (buf, sizeof buf, "%016llx", static_cast<unsigned long long> (h));
  return buf;
}

ArrivalSpec
arrivals_at (const ExperimentConfig& c, double s)
{
  if (c.arrival_kind == "markov" && !c.p.empty ())
    return ArrivalSpec::markov (c.p, c.q, c.seed);
  RateVector lambda = RateVector (c.rates).scaled (s);
  if (c.arrival_kind == "markov")
    return ArrivalSpec::markov_with_means (lambda, c.markov_p, c.seed);
  return ArrivalSpec::bernoulli (lambda, c.seed);
}

bool
contract_property_P (const std::string& policy)
{
  static const std::set<std::string> names{"pi3_iq_tilde", "pi3_iq", "phi_ic", "phi_ic_tilde"};
  return names.count (policy) > 0;
}

bool
contract_msm (const std::string& policy)
{
  static const std::set<std::string> names{
      "pi3_td",      "pi3_bu",      "pi3_iq_tilde", "pi3_oq",      "rho3_gamma", "piN_td", "piN_bu",
      "spliced_m",   "spliced_tilde", "pi4_td",     "pi4_tilde_1", "pi4_tilde_2",
      "pi4_tilde_3", "pi4_tilde_4", "pi5_m",        "pi5_tilde",   "L_of",       "msm_random_tie"};
  return names.count (policy) > 0;
}

std::vector<const RunRow*>
ExperimentReport::select (const std::string& policy, double sweep_value) const
{
  std::vector<const RunRow*> out;
  for (const auto& r : rows)
    if (r.policy == policy && same_point (r.sweep_value, sweep_value))
      out.push_back (&r);
  return out;
}

double
ExperimentReport::mean_backlog (const std::string& policy, double sweep_value) const
{
  auto sel = select (policy, sweep_value);
  if (sel.empty ())
    throw ConfigError ("no rows for " + policy + " at " + fmt (sweep_value));
  double s = 0.0;
  for (const auto* r : sel)
    s += r->metrics.mean_sum_backlog;
  return s / static_cast<double> (sel.size ());
}

ExperimentReport
run_experiment (const ExperimentConfig& c)
{
  ExperimentReport rep;
  rep.hash = config_hash (c.source);
  rep.sweep_variable = c.sweep_variable.empty () ? "none" : c.sweep_variable;
  std::vector<double> points = c.sweep_values;
  if (points.empty ())
    points.push_back (1.0);

  std::vector<SimConfig> sims;
  std::vector<RunRow> rows;
  for (double v : points)
    {
      double s = c.sweep_variable == "s" ? v : 1.0;
      ArrivalSpec arr = arrivals_at (c, s);
      RateVector lambda (arr.means ());
      double load = region_load (c.graph, lambda);
      bool inside = in_capacity_region (c.graph, lambda, true);
      if (!inside)
        rep.warnings.push_back ("capacity: rates at " + rep.sweep_variable + "=" + fmt (v) + " lie outside the open region (load " +
                                fmt (load) + ")");
      for (const auto& base : c.policies)
        {
          PolicySpec p = base;
          if (c.sweep_variable == "gamma" && p.name == "rho3_gamma")
            p.params["gamma"] = v;
          if (c.sweep_variable == "T" && ends_with (p.name, "_T"))
            p.params["T"] = v;
          auto probe = make_policy (p, c.graph);
          for (int k = 0; k < c.seeds; ++k)
            {
              SimConfig sc;
              sc.graph = c.graph;
              sc.arrivals = arr;
              sc.policy = p;
              sc.horizon = c.horizon;
              sc.warmup = c.warmup;
              sc.seed = c.seed + static_cast<std::uint64_t> (k);
              sc.monitors = c.monitors;
              sc.trace_slots = c.trace_slots;
              sims.push_back (sc);
              RunRow r;
              r.sweep_value = v;
              r.policy = p.label ();
              r.claim = probe->throughput_claim ();
              r.seed = sc.seed;
              r.rates = lambda.values ();
              r.load = load;
              r.in_region = inside;
              rows.push_back (std::move (r));
            }
        }
    }

  auto results = run_batch (sims);
  for (std::size_t i = 0; i < rows.size (); ++i)
    {
      rows[i].metrics = std::move (results[i].metrics);
      rows[i].verdict = stability_verdict (rows[i].metrics);
      const std::string& name = sims[i].policy.name;
      const Metrics& m = rows[i].metrics;
      if ((c.monitors.property_P && contract_property_P (name) && m.property_P_violations > 0) ||
          (c.monitors.msm && contract_msm (name) && m.msm_violations > 0))
        {
          rep.contract_violation = true;
          rep.warnings.push_back ("monitor: " + rows[i].policy + " seed " + std::to_string (rows[i].seed) +
                                  " violated a contracted property");
        }
    }
  if (!c.trace.empty () && !results.empty ())
    {
      std::ofstream tr (c.trace);
      if (!tr)
        throw ConfigError ("cannot write trace " + c.trace);
      write_trace_csv (results.front ().trace, tr);
    }

  rep.rows = std::move (rows);
  std::ostringstream g, h;
  g << "# graph=" << c.graph.describe () << " arrivals=" << c.arrival_kind;
  if (c.arrival_kind == "markov")
    g << "(p=" << c.markov_p << ")";
  g << " base_rates=" << join (c.rates);
  h << "# horizon=" << c.horizon << " warmup=" << (c.warmup < 0 ? c.horizon / 10 : static_cast<std::uint64_t> (c.warmup))
    << " seeds=" << c.seeds << " base_seed=" << c.seed;
  rep.header = {"# config_hash=" + rep.hash, g.str (), h.str ()};
  return rep;
}

void
write_csv (const ExperimentReport& r, std::ostream& os)
{
  for (const auto& h : r.header)
    os << h << '\n';
  for (const auto& w : r.warnings)
    os << "# warning: " << w << '\n';
  os << "config_hash,sweep_variable,sweep_value,policy,to_claim,seed,load,in_region,mean_sum_backlog,mean_delay,"
        "max_sum_backlog,growth_slope,late_growth_slope,verdict,property_P_violations,msm_violations,per_queue_mean\n";
  os << std::setprecision (10);
  for (const auto& row : r.rows)
    {
      double total = 0.0;
      for (double x : row.rates)
        total += x;
      const Metrics& m = row.metrics;
      os << r.hash << ',' << r.sweep_variable << ',' << row.sweep_value << ",\"" << row.policy << "\"," << row.claim << ','
         << row.seed << ',' << row.load << ',' << (row.in_region ? 1 : 0) << ',' << m.mean_sum_backlog << ','
         << (total > 0 ? m.mean_sum_backlog / total : 0.0) << ',' << m.max_sum_backlog << ',' << m.growth_slope << ','
         << m.late_growth_slope << ',' << to_string (row.verdict) << ',' << m.property_P_violations << ','
         << m.msm_violations << ',' << join (m.per_queue_mean) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Recipes

bool
RecipeReport::passed () const
{
  return std::all_of (checks.begin (), checks.end (), [] (const Check& c) { return c.pass; });
}

std::vector<std::string>
recipe_names ()
{
  return {"fig7", "fig8", "fig9", "fig10", "fig11", "table2", "table3", "switch_counterexample", "oracle_suite"};
}

namespace {

Json
base_json (const RecipeOptions& o)
{
  Json j;
  j["horizon"] = o.horizon;
  j["seeds"] = o.seeds;
  j["seed"] = o.seed;
  if (o.warmup >= 0)
    j["warmup"] = o.warmup;
  return j;
}

Json
path_graph (int n)
{
  return Json{{"kind", "path"}, {"n", n}};
}

const std::vector<std::string> kThreeQueuePolicies{"pi3_iq_tilde", "pi3_iq", "maxweight", "pi3_td", "pi3_bu"};

void
delay_figure (RecipeReport& rep, const RecipeOptions& o, std::vector<double> rates, bool markov, double min_gain)
{
  Json j = base_json (o);
  j["graph"] = path_graph (3);
  j["arrivals"] = markov ? Json{{"kind", "markov"}, {"rates", rates}, {"p", 0.1}} : Json{{"kind", "bernoulli"}, {"rates", rates}};
  j["policies"] = kThreeQueuePolicies;
  std::vector<double> grid = markov ? std::vector<double>{0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99}
                                    : std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};
  j["sweep"] = Json{{"variable", "s"}, {"values", grid}};
  auto r = run_experiment (parse_config (j));
  double iq = r.mean_backlog ("pi3_iq_tilde", 0.95);
  double mw = r.mean_backlog ("maxweight", 0.95);
  double td = r.mean_backlog ("pi3_td", 0.95);
  rep.checks.push_back ({"inner-priority below MaxWeight at s=0.95", iq < mw, fmt (iq) + " vs " + fmt (mw)});
  rep.checks.push_back ({"inner-priority below top-down at s=0.95", iq < td, fmt (iq) + " vs " + fmt (td)});
  if (min_gain > 0)
    {
      double gain = 1.0 - iq / mw;
      rep.checks.push_back ({"gain over MaxWeight at s=0.95 >= " + fmt (min_gain), gain >= min_gain, "gain " + fmt (gain)});
    }
  rep.parts.push_back (std::move (r));
}

void
fig11 (RecipeReport& rep, const RecipeOptions& o)
{
  Json j = base_json (o);
  j["graph"] = path_graph (3);
  j["arrivals"] = Json{{"kind", "markov"}, {"rates", {0.74, 0.25, 0.74}}, {"p", 0.1}};
  j["policies"] = Json::array ();
  for (double g : {0.5, 0.55, 0.6})
    j["policies"].push_back (Json{{"name", "rho3_gamma"}, {"gamma", g}});
  std::vector<double> grid{0.8, 0.85, 0.9, 0.95, 0.99};
  j["sweep"] = Json{{"variable", "s"}, {"values", grid}};
  auto cfg = parse_config (j);
  auto r = run_experiment (cfg);
  for (const auto& p : cfg.policies)
    {
      std::string label = p.label ();
      double first = -1;
      for (double s : grid)
        {
          auto rows = r.select (label, s);
          int bad = 0;
          for (const auto* row : rows)
            bad += row->verdict == Verdict::unstable;
          if (2 * bad > static_cast<int> (rows.size ()))
            {
              first = s;
              break;
            }
        }
      rep.checks.push_back ({label + " unstable at some s<1", first > 0 && first < 1.0,
                             first > 0 ? "first unstable s=" + fmt (first) : "no unstable point"});
    }
  rep.parts.push_back (std::move (r));
}

struct TableRow
{
  std::string title;
  Json graph;
  std::vector<double> rates;
  Json qnb, mw, third; // third may be null
  double ref_qnb, ref_mw, ref_third;
};

void
table (RecipeReport& rep, const RecipeOptions& o, const std::vector<TableRow>& rows, double tol)
{
  for (const auto& t : rows)
    {
      Json j = base_json (o);
      j["graph"] = t.graph;
      j["arrivals"] = Json{{"kind", "bernoulli"}, {"rates", t.rates}};
      j["policies"] = Json::array ({t.qnb, t.mw});
      if (!t.third.is_null ())
        j["policies"].push_back (t.third);
      auto cfg = parse_config (j);
      auto r = run_experiment (cfg);
      double q = r.mean_backlog (cfg.policies[0].label (), 1.0);
      double m = r.mean_backlog (cfg.policies[1].label (), 1.0);
      auto within = [&] (double x, double ref) { return std::abs (x - ref) <= tol * ref; };
      if (t.third.is_null () || t.ref_third > t.ref_qnb)
        rep.checks.push_back ({t.title + ": QNB below MaxWeight", q < m, fmt (q) + " vs " + fmt (m)});
      if (!t.third.is_null ())
        {
          double l = r.mean_backlog (cfg.policies[2].label (), 1.0);
          if (t.ref_third < t.ref_qnb)
            {
              rep.checks.push_back ({t.title + ": L(MW-alpha) below QNB", l < q, fmt (l) + " vs " + fmt (q)});
              rep.checks.push_back ({t.title + ": L(MW-alpha) within " + fmt (100 * tol) + "% of " + fmt (t.ref_third),
                                     within (l, t.ref_third), fmt (l)});
            }
          else
            rep.checks.push_back ({t.title + ": QNB below L(MW-alpha)", q < l, fmt (q) + " vs " + fmt (l)});
        }
      rep.checks.push_back ({t.title + ": QNB within " + fmt (100 * tol) + "% of " + fmt (t.ref_qnb), within (q, t.ref_qnb),
                             fmt (q)});
      rep.parts.push_back (std::move (r));
    }
}

void
table2 (RecipeReport& rep, const RecipeOptions& o)
{
  Json lmw = Json{{"name", "L_of"}, {"inner", Json{{"name", "maxweight_alpha"}, {"alpha", 0.01}}}};
  std::vector<TableRow> rows{
      {"N=4", path_graph (4), {0.49, 0.49, 0.49, 0.49}, "pi4_tilde_1", "maxweight", lmw, 45.963, 57.302, 43.508},
      {"N=5", path_graph (5), {0.15, 0.049, 0.95, 0.049, 0.15}, "pi5_tilde", "maxweight", lmw, 61.537, 88.243, 75.642},
      {"N=15",
       path_graph (15),
       {0.80, 0.15, 0.15, 0.15, 0.15, 0.8, 0.049, 0.95, 0.049, 0.8, 0.15, 0.15, 0.15, 0.15, 0.80},
       "spliced_tilde",
       "maxweight",
       lmw,
       76.72,
       107.88,
       92.100}};
  table (rep, o, rows, 0.20);
}

void
table3 (RecipeReport& rep, const RecipeOptions& o)
{
  rep.header.push_back ("# assumption: star of cliques sizes [1,3,1,1], centre queue rate 0.09, rates clique-major");
  rep.header.push_back ("# assumption: linear array sizes [3,1,2,3]; 4-clique policy runs the 5-clique rule with an empty fifth clique");
  std::vector<TableRow> rows{
      {"star of cliques",
       Json{{"kind", "star_of_cliques"}, {"sizes", {1, 3, 1, 1}}},
       {0.09, 0.3, 0.3, 0.3, 0.9, 0.9},
       "phi_ic_tilde",
       "maxweight",
       nullptr,
       45.535,
       57.861,
       0},
      {"linear array of cliques",
       Json{{"kind", "linear_array_of_cliques"}, {"sizes", {3, 1, 2, 3}}},
       {0.1, 0.1, 0.1, 0.049, 0.65, 0.3, 0.049, 0.0, 0.0},
       "theta5_m",
       "maxweight",
       nullptr,
       245.038,
       309.45,
       0}};
  table (rep, o, rows, 0.30);
}

void
switch_counterexample (RecipeReport& rep, const RecipeOptions& o)
{
  Json j = base_json (o);
  j["graph"] = path_graph (4);
  j["arrivals"] = Json{{"kind", "bernoulli"}, {"rates", {0.47, 0.47, 0.47, 0.47}}};
  j["policies"] = {"msm_random_tie", "pi4_tilde_1"};
  auto r = run_experiment (parse_config (j));
  int grow = 0, stable = 0;
  auto tie = r.select ("msm_random_tie", 1.0);
  for (const auto* row : tie)
    grow += row->metrics.queue_slopes[1] + row->metrics.queue_slopes[2] > 1e-3;
  auto good = r.select ("pi4_tilde_1", 1.0);
  for (const auto* row : good)
    stable += row->verdict == Verdict::stable;
  int n = static_cast<int> (tie.size ());
  rep.checks.push_back ({"random tie-break: Q2+Q3 grows in >= 80% of seeds", 10 * grow >= 8 * n,
                         std::to_string (grow) + "/" + std::to_string (n)});
  rep.checks.push_back ({"pi4_tilde_1 stable in >= 90% of seeds", 10 * stable >= 9 * n,
                         std::to_string (stable) + "/" + std::to_string (good.size ())});
  rep.parts.push_back (std::move (r));
}

void
oracle_suite (RecipeReport& rep)
{
  auto run_chain = [&] (const ConflictGraph& g, RateVector l, const std::string& name, int B) {
    auto pol = make_policy (PolicySpec (name), g);
    auto chain = build_chain (g, l, *pol, B);
    double err = max_row_error (chain);
    rep.checks.push_back ({name + " rows stochastic", err < 1e-12, "max row error " + fmt (err)});
    auto pi = stationary (chain);
    for (const auto& row : verify_formulas (chain, pi))
      rep.checks.push_back ({name + " " + row.quantity, row.delta () <= 0.01,
                             "formula " + fmt (row.formula) + " oracle " + fmt (row.oracle) + " |d| " + fmt (row.delta ())});
  };
  run_chain (ConflictGraph::path (3), RateVector{0.2, 0.3, 0.2}, "pi3_td", 25);
  run_chain (ConflictGraph::path (4), RateVector{0.2, 0.25, 0.2, 0.2}, "pi4_td", 25);

  auto a = binomial_pmf (3, 0.5);
  double exact = truncated_difference (a, {0.6, 0.4});
  double formula = truncated_difference_formula (a, 0.4);
  rep.checks.push_back ({"E[(A-B)^+] identity, A~Bin(3,0.5), B~Bern(0.4)", std::abs (exact - formula) < 1e-12 && std::abs (exact - 1.15) < 1e-12,
                         "exhaustive " + fmt (exact, 12) + " formula " + fmt (formula, 12)});
}

} // namespace

RecipeReport
reproduce (const std::string& recipe, const RecipeOptions& o)
{
  RecipeReport rep;
  rep.recipe = recipe;
  rep.header.push_back ("# recipe=" + recipe);
  rep.header.push_back ("# horizon=" + std::to_string (o.horizon) + " seeds=" + std::to_string (o.seeds) +
                        " base_seed=" + std::to_string (o.seed));
  if (recipe == "fig7")
    delay_figure (rep, o, {0.25, 0.74, 0.25}, false, 0.20);
  else if (recipe == "fig8")
    delay_figure (rep, o, {0.74, 0.25, 0.74}, false, 0.0);
  else if (recipe == "fig9")
    delay_figure (rep, o, {0.25, 0.74, 0.25}, true, 0.25);
  else if (recipe == "fig10")
    delay_figure (rep, o, {0.74, 0.25, 0.74}, true, 0.25);
  else if (recipe == "fig11")
    fig11 (rep, o);
  else if (recipe == "table2")
    table2 (rep, o);
  else if (recipe == "table3")
    table3 (rep, o);
  else if (recipe == "switch_counterexample")
    switch_counterexample (rep, o);
  else if (recipe == "oracle_suite")
    oracle_suite (rep);
  else
    throw ConfigError ("unknown recipe: " + recipe);
  return rep;
}

void
write_recipe (const RecipeReport& r, std::ostream& os)
{
  for (const auto& h : r.header)
    os << h << '\n';
  for (const auto& c : r.checks)
    os << "# " << (c.pass ? "PASS" : "FAIL") << " " << c.name << " (" << c.detail << ")\n";
  for (const auto& part : r.parts)
    write_csv (part, os);
}

std::vector<Check>
verify_msm (int n)
{
  if (n < 1 || n > 20)
    throw DimensionError ("verify-msm supports 1..20 queues");
  ConflictGraph g = ConflictGraph::path (n);
  std::vector<PolicySpec> specs;
  for (const auto& name : path_policy_names ())
    {
      if (name == "L_of")
        continue;
      if (contract_msm (name) || name == "maxweight" || name == "maxweight_alpha")
        specs.emplace_back (name);
    }
  specs.push_back (PolicySpec::wrap ("L_of", PolicySpec ("maxweight")));
  specs.push_back (PolicySpec::wrap ("L_of", PolicySpec ("maxweight_alpha", {{"alpha", 0.01}})));
  if (n % 2 == 1)
    specs.push_back (PolicySpec::wrap ("L_of", PolicySpec ("spliced_sp")));

  std::vector<Check> out;
  std::vector<std::int64_t> unit (static_cast<std::size_t> (n));
  for (const auto& spec : specs)
    {
      PolicyPtr pol;
      try
        {
          pol = make_policy (spec, g);
        }
      catch (const ConfigError&)
        {
          continue; // not defined for this n
        }
      std::uint64_t bad = 0;
      std::string first;
      for (std::uint64_t z = 0; z < (std::uint64_t{1} << n); ++z)
        {
          for (int i = 0; i < n; ++i)
            unit[static_cast<std::size_t> (i)] = (z >> i) & 1u;
          Observation obs{unit, OccupancyVector (n, z), 0};
          for (const auto& [p, s] : pol->decision_distribution (obs))
            if (!is_msm (g, obs.zeta, s))
              {
                if (bad++ == 0)
                  first = obs.zeta.to_string () + "->" + s.to_string ();
              }
        }
      std::string note = spec.name.rfind ("maxweight", 0) == 0 || !spec.inner.empty () ? " (unit backlogs)" : "";
      out.push_back ({spec.label () + " MSM on all occupancies" + note, bad == 0,
                      bad ? std::to_string (bad) + " failures, first " + first : std::to_string (1ULL << n) + " states"});
    }

  // L on every valid activation: MSM, idempotent.
  if (n <= 12)
    {
      std::uint64_t bad = 0, total = 0;
      for (std::uint64_t z = 0; z < (std::uint64_t{1} << n); ++z)
        for (std::uint64_t s = 0; s < (std::uint64_t{1} << n); ++s)
          {
            if (s & (s << 1))
              continue;
            ++total;
            OccupancyVector zv (n, z);
            auto l = project_L (zv, ActivationVector (n, s));
            if (!is_msm (g, zv, l) || !(project_L (zv, l) == l))
              ++bad;
          }
      out.push_back ({"L projects every valid activation to an idempotent MSM activation", bad == 0,
                      std::to_string (total - bad) + "/" + std::to_string (total)});
    }
  return out;
}

std::vector<Check>
oracle_checks (const ExperimentConfig& c, std::ostream* csv)
{
  std::vector<Check> out;
  RateVector lambda (arrivals_at (c, 1.0).means ());
  if (c.arrival_kind != "bernoulli")
    throw ConfigError ("oracle supports Bernoulli arrivals only");
  if (csv)
    *csv << "# config_hash=" << config_hash (c.source) << "\npolicy,quantity,formula,oracle,abs_delta\n";
  for (const auto& spec : c.policies)
    {
      auto pol = make_policy (spec, c.graph);
      auto chain = build_chain (c.graph, lambda, *pol, c.truncation);
      out.push_back ({spec.label () + " rows stochastic", max_row_error (chain) < 1e-12, ""});
      auto pi = stationary (chain);
      std::vector<FormulaRow> rows;
      if ((spec.name == "pi3_td" && c.graph.total_queues () == 3) || (spec.name == "pi4_td" && c.graph.total_queues () == 4))
        rows = verify_formulas (chain, pi);
      else
        for (int i = 0; i < chain.n; ++i)
          {
            double pe = probability (chain, pi, [i] (const std::vector<int>& q) { return q[static_cast<std::size_t> (i)] == 0; });
            rows.push_back ({"P{Q_" + std::to_string (i + 1) + "=0}", NAN, pe});
            rows.push_back ({"P{S_" + std::to_string (i + 1) + "=1}", NAN, offered_probability (chain, pi, i)});
          }
      for (const auto& r : rows)
        {
          bool has_formula = !std::isnan (r.formula);
          if (has_formula)
            out.push_back ({spec.label () + " " + r.quantity, r.delta () <= 0.01, fmt (r.formula) + " vs " + fmt (r.oracle)});
          if (csv)
            *csv << '"' << spec.label () << "\"," << r.quantity << ',' << (has_formula ? fmt (r.formula, 10) : "") << ','
                 << fmt (r.oracle, 10) << ',' << (has_formula ? fmt (r.delta (), 10) : "") << '\n';
        }
    }
  return out;
}

} // namespace qnb
