#include "canon/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "canon/conditioning.hpp"
#include "canon/distribution.hpp"
#include "canon/divergence.hpp"
#include "canon/errors.hpp"
#include "canon/experiments.hpp"
#include "canon/interval.hpp"
#include "canon/ldp.hpp"
#include "canon/report_io.hpp"
#include "canon/tilting.hpp"

namespace canon::cli {

namespace {

constexpr const char* kLawGrammar =
    "law grammar: normal:mu,sigma2 | exp:rate | pois:lambda | "
    "gamma:shape,rate | uniform:a,b | table:path.csv";

struct LawSpec {
  ContPtr cont;
  DiscPtr disc;
};

double parse_number(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size())
      fail(ErrorKind::BadConfig,
           "trailing characters in number '" + s + "' (" + context + ")");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(ErrorKind::BadConfig,
         "cannot parse number '" + s + "' (" + context + ")");
  }
}

LawSpec parse_law(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos || colon == 0)
    fail(ErrorKind::BadConfig, "bad law '" + s + "'; " + kLawGrammar);
  const std::string head = s.substr(0, colon);
  const std::string rest = s.substr(colon + 1);
  LawSpec out;
  if (head == "table") {
    out.cont = load_table_csv(rest);
    return out;
  }
  std::vector<double> f;
  std::stringstream ss(rest);
  std::string piece;
  while (std::getline(ss, piece, ','))
    f.push_back(parse_number(piece, "law '" + s + "'"));
  auto arity = [&](std::size_t want) {
    if (f.size() != want)
      fail(ErrorKind::BadConfig, "law '" + s + "' needs " +
                                     std::to_string(want) + " parameters; " +
                                     kLawGrammar);
  };
  if (head == "normal") {
    arity(2);
    out.cont = make_normal(f[0], f[1]);
  } else if (head == "exp") {
    arity(1);
    out.cont = make_exponential(f[0]);
  } else if (head == "gamma") {
    arity(2);
    out.cont = make_gamma(f[0], f[1]);
  } else if (head == "uniform") {
    arity(2);
    out.cont = make_uniform(f[0], f[1]);
  } else if (head == "pois") {
    arity(1);
    out.disc = make_poisson(f[0]);
  } else {
    fail(ErrorKind::BadConfig, "unknown law family '" + head + "'; " +
                                   kLawGrammar);
  }
  return out;
}

nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream ifs(path);
  if (!ifs) fail(ErrorKind::IoError, "cannot read config '" + path + "'");
  try {
    nlohmann::json j = nlohmann::json::parse(ifs);
    if (!j.is_object())
      fail(ErrorKind::BadConfig, "config '" + path + "' must be an object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::BadConfig,
         "config parse error in '" + path + "': " + e.what());
  }
}

void check_keys(const nlohmann::json& cfg,
                std::initializer_list<const char*> allowed,
                const std::string& cmd) {
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    const bool known = std::any_of(
        allowed.begin(), allowed.end(),
        [&](const char* k) { return it.key() == k; });
    if (!known)
      fail(ErrorKind::BadConfig,
           "unknown key '" + it.key() + "' in " + cmd + " config");
  }
}

double num_of(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number())
    fail(ErrorKind::BadConfig, "key '" + key + "' must be a number");
  return v.get<double>();
}

std::string str_of(const nlohmann::json& v, const std::string& key) {
  if (!v.is_string())
    fail(ErrorKind::BadConfig, "key '" + key + "' must be a string");
  return v.get<std::string>();
}

// number formatted for embedding in a law string; csv_float keeps round-trips
std::string law_num(double v) { return csv_float(v); }

nlohmann::json config_echo(const RunConfig& cfg) {
  return {{"command", cfg.command},
          {"format", cfg.format},
          {"params", cfg.params},
          {"seed", cfg.seed}};
}

RunOutput render(const RunConfig& cfg, const nlohmann::json& result,
                 const CsvTable& table,
                 const std::vector<std::pair<std::string, std::string>>& extra,
                 int code) {
  RunOutput out;
  out.code = code;
  if (cfg.format == "json") {
    out.text = render_json({{"config", config_echo(cfg)}, {"result", result}});
  } else {
    auto pre = preamble_of(config_echo(cfg));
    pre.insert(pre.end(), extra.begin(), extra.end());
    out.text = render_csv(pre, table);
  }
  return out;
}

RunOutput exec_tilt(const RunConfig& cfg) {
  const LawSpec base = parse_law(str_of(cfg.params.at("law"), "law"));
  TiltParam p;
  p.lambda = num_of(cfg.params.at("lambda"), "lambda");
  p.provenance = tilt_route_from_string(str_of(cfg.params.at("route"), "route"));
  nlohmann::json result;
  double normalizer = 0.0, mean = 0.0, variance = 0.0;
  if (base.cont) {
    const ContPtr t = tilt(base.cont, p);
    result["base"] = base.cont->describe();
    result["tilted"] = t->describe();
    normalizer = tilt_normalizer(*t);
    mean = t->mean();
    variance = t->variance();
  } else {
    const DiscPtr t = tilt(base.disc, p);
    result["base"] = base.disc->describe();
    result["tilted"] = t->describe();
    normalizer = tilt_normalizer(*t);
    mean = t->mean();
    variance = t->variance();
  }
  result["lambda"] = json_number(p.lambda);
  result["route"] = to_string(p.provenance);
  result["normalizer"] = json_number(normalizer);
  result["mean"] = json_number(mean);
  result["variance"] = json_number(variance);
  CsvTable t;
  t.header = {"metric", "value"};
  t.rows = {{"lambda", csv_float(p.lambda)},
            {"normalizer", csv_float(normalizer)},
            {"mean", csv_float(mean)},
            {"variance", csv_float(variance)}};
  const std::vector<std::pair<std::string, std::string>> extra = {
      {"base", result["base"].get<std::string>()},
      {"tilted", result["tilted"].get<std::string>()}};
  return render(cfg, result, t, extra, 0);
}

RunOutput exec_condition(const RunConfig& cfg) {
  if (cfg.params.contains("joint"))
    fail(ErrorKind::UnsupportedDependence,
         "joint law configs are not supported on the command line; use the "
         "library's dependent-bath interface");
  const LawSpec xs = parse_law(str_of(cfg.params.at("x"), "x"));
  const LawSpec ys = parse_law(str_of(cfg.params.at("y"), "y"));
  const Interval I(num_of(cfg.params.at("h"), "h"),
                   num_of(cfg.params.at("delta"), "delta"));
  const auto mc = std::uint64_t(num_of(cfg.params.at("mc"), "mc"));
  ConditionalLaw law;
  if (bool(xs.cont) != bool(ys.cont))
    fail(ErrorKind::BadConfig,
         "x and y must both be continuous or both discrete");
  if (xs.cont)
    law = mc == 0 ? condition_exact(xs.cont, ys.cont, I)
                  : condition_mc(xs.cont, ys.cont, I, mc, cfg.seed);
  else
    law = mc == 0 ? condition_exact(xs.disc, ys.disc, I)
                  : condition_mc(xs.disc, ys.disc, I, mc, cfg.seed);
  return render(cfg, to_json(law), csv_table(law),
                {{"method", law.method},
                 {"mass_in_window", csv_float(law.mass_in_window)}},
                0);
}

RunOutput exec_divergence(const RunConfig& cfg) {
  const LawSpec ps = parse_law(str_of(cfg.params.at("p"), "p"));
  const LawSpec qs = parse_law(str_of(cfg.params.at("q"), "q"));
  if (bool(ps.cont) != bool(qs.cont))
    fail(ErrorKind::BadConfig,
         "p and q must both be continuous or both discrete");
  const DivergenceReport rep =
      ps.cont ? scaled_divergence(*ps.cont, *qs.cont, 1.0)
              : scaled_divergence(*ps.disc, *qs.disc, 1.0);
  nlohmann::json result = {{"kl", json_number(rep.kl)},
                           {"tv", json_number(rep.tv)},
                           {"pinsker_bound", json_number(rep.pinsker_bound)}};
  CsvTable t;
  t.header = {"metric", "value"};
  t.rows = {{"kl", csv_float(rep.kl)},
            {"tv", csv_float(rep.tv)},
            {"pinsker_bound", csv_float(rep.pinsker_bound)}};
  if (rep.has_sup) {
    result["sup_dist"] = json_number(rep.sup_dist);
    t.rows.push_back({"sup_dist", csv_float(rep.sup_dist)});
  }
  return render(cfg, result, t, {}, 0);
}

RunOutput exec_ratefn(const RunConfig& cfg) {
  const LawSpec d = parse_law(str_of(cfg.params.at("dist"), "dist"));
  const RateFunction rf =
      d.cont ? rate_function(d.cont) : rate_function(d.disc);
  const int points = int(num_of(cfg.params.at("points"), "points"));
  if (points < 2 || points > 100001)
    fail(ErrorKind::BadConfig, "points must be in [2, 100001]");
  double ylo, yhi;
  if (cfg.params.contains("y_lo") && cfg.params.contains("y_hi")) {
    ylo = num_of(cfg.params.at("y_lo"), "y_lo");
    yhi = num_of(cfg.params.at("y_hi"), "y_hi");
  } else if (cfg.params.contains("y_lo") || cfg.params.contains("y_hi")) {
    fail(ErrorKind::BadConfig, "give both y_lo and y_hi, or neither");
  } else {
    double qlo, qhi;
    if (d.cont) {
      qlo = quantile(*d.cont, 0.01);
      qhi = quantile(*d.cont, 0.99);
    } else {
      qlo = d.disc->position(quantile_index(*d.disc, 0.01));
      qhi = d.disc->position(quantile_index(*d.disc, 0.99));
    }
    const auto [dlo, dhi] = rf.domain;
    const double span =
        std::isfinite(dhi - dlo) ? dhi - dlo : std::max(qhi - qlo, 1.0);
    const double eps = 1e-6 * span;
    ylo = std::isfinite(dlo) ? std::max(qlo, dlo + eps) : qlo;
    yhi = std::isfinite(dhi) ? std::min(qhi, dhi - eps) : qhi;
    if (!(yhi > ylo))
      fail(ErrorKind::BadConfig, "cannot pick a default y range; pass "
                                 "y_lo/y_hi");
  }
  const RateTable table = tabulate(rf, ylo, yhi, points);
  return render(cfg, to_json(table), csv_table(table),
                {{"mean", csv_float(table.mean)},
                 {"variance", csv_float(table.variance)}},
                0);
}

RunOutput exec_experiment(const RunConfig& cfg) {
  ExperimentSpec spec;
  spec.name = str_of(cfg.params.at("name"), "name");
  spec.seed = cfg.seed;
  for (const auto& v : cfg.params.at("n_grid")) {
    if (!v.is_number_integer())
      fail(ErrorKind::BadConfig, "n_grid entries must be integers");
    spec.n_grid.push_back(v.get<int>());
  }
  for (auto it = cfg.params.at("params").begin();
       it != cfg.params.at("params").end(); ++it)
    spec.params[it.key()] = num_of(it.value(), "params." + it.key());
  for (auto it = cfg.params.at("text").begin();
       it != cfg.params.at("text").end(); ++it)
    spec.text[it.key()] = str_of(it.value(), "text." + it.key());
  const ConvergenceReport rep = run_experiment(spec);
  const int code = rep.verdict == "pass" ? 0 : 2;
  return render(cfg, to_json(rep), csv_table(rep), report_preamble(rep), code);
}

}  // namespace

std::string usage_text(const std::string& command) {
  const std::string grammar = std::string(kLawGrammar) + "\n";
  const std::string common =
      "common flags: --seed N, --out PATH (or json|csv for stdout), "
      "--format json|csv, --config FILE.json\n";
  if (command == "tilt")
    return "tilt: reweight a law by e^{-lambda x}\n" + common +
           "flags/keys: --family NAME-or-LAW, --lambda L (required), --route "
           "user|bath-slope|rate-function|max-entropy, family parameters "
           "--rate --mu --sigma2 --shape --a --b --mean --table\n" +
           grammar;
  if (command == "condition")
    return "condition: law of X given X+Y in [h, h+delta]\n" + common +
           "flags/keys: --x LAW, --y LAW, --h H, --delta D, --mc SAMPLES "
           "(0 = exact Bayes)\n" +
           grammar;
  if (command == "divergence")
    return "divergence: KL, total variation, Pinsker bound for two laws\n" +
           common + "flags/keys: --p LAW, --q LAW\n" + grammar;
  if (command == "ratefn")
    return "ratefn: tabulate the Cramer rate function of a law\n" + common +
           "flags/keys: --dist LAW, --points N, --y-lo A, --y-hi B\n" +
           grammar;
  if (command == "experiment") {
    std::string names;
    for (const auto& n : experiment_names()) names += "  " + n + "\n";
    return "experiment: run a convergence study and report a verdict\n" +
           common +
           "flags/keys: --name NAME, --config FILE.json with keys name, "
           "n_grid, seed, params, text\nexperiments:\n" + names;
  }
  return "usage: canontilt COMMAND [flags]\ncommands: tilt, condition, "
         "divergence, ratefn, experiment\n" +
         common + grammar + "run 'canontilt COMMAND --help' for details\n";
}

RunConfig parse_args(const std::vector<std::string>& args) {
  CLI::App app{"canonical distributions from conditioning: tilt laws, "
               "condition on windows, compare, and run convergence studies"};
  app.require_subcommand(1);
  // long-form help only, so condition's --h window flag stays available
  app.set_help_flag("--help", "print help");

  std::uint64_t seed = 0;
  std::string out_path, format = "json", config_path;
  std::vector<CLI::Option*> seed_opts, format_opts;
  auto add_common = [&](CLI::App* sub) {
    sub->set_help_flag("--help", "print help");
    seed_opts.push_back(sub->add_option("--seed", seed, "rng seed"));
    sub->add_option("--out", out_path,
                    "output path, or the literal json|csv for stdout");
    format_opts.push_back(
        sub->add_option("--format", format, "output format")
            ->check(CLI::IsMember({"json", "csv"})));
    sub->add_option("--config", config_path, "json config file");
  };

  // tilt
  auto* tilt_cmd = app.add_subcommand("tilt", "exponential reweighting");
  std::string family, route, table_path;
  double rate = 0, mu = 0, sigma2 = 0, shape = 0, av = 0, bv = 0, mean = 0,
         lambda = 0;
  auto* fam_opt = tilt_cmd->add_option("--family", family, "family or law");
  auto* rate_opt = tilt_cmd->add_option("--rate", rate, "rate");
  auto* mu_opt = tilt_cmd->add_option("--mu", mu, "mean");
  auto* sig_opt = tilt_cmd->add_option("--sigma2", sigma2, "variance");
  auto* shape_opt = tilt_cmd->add_option("--shape", shape, "shape");
  auto* a_opt = tilt_cmd->add_option("--a", av, "left endpoint");
  auto* b_opt = tilt_cmd->add_option("--b", bv, "right endpoint");
  auto* mean_opt = tilt_cmd->add_option("--mean", mean, "poisson mean");
  auto* table_opt = tilt_cmd->add_option("--table", table_path, "csv path");
  auto* lambda_opt = tilt_cmd->add_option("--lambda", lambda, "tilt exponent");
  auto* route_opt = tilt_cmd->add_option("--route", route, "provenance");
  add_common(tilt_cmd);

  // condition
  auto* cond_cmd = app.add_subcommand("condition", "window conditioning");
  std::string xs, ys;
  double hv = 0, dv = 0, mcv = 0;
  auto* x_opt = cond_cmd->add_option("--x", xs, "subsystem law");
  auto* y_opt = cond_cmd->add_option("--y", ys, "bath law");
  auto* h_opt = cond_cmd->add_option("--h", hv, "window left end");
  auto* d_opt = cond_cmd->add_option("--delta", dv, "window width");
  auto* mc_opt = cond_cmd->add_option("--mc", mcv, "rejection samples");
  add_common(cond_cmd);

  // divergence
  auto* div_cmd = app.add_subcommand("divergence", "compare two laws");
  std::string pv, qv;
  auto* p_opt = div_cmd->add_option("--p", pv, "first law");
  auto* q_opt = div_cmd->add_option("--q", qv, "second law");
  add_common(div_cmd);

  // ratefn
  auto* rate_cmd = app.add_subcommand("ratefn", "rate function table");
  std::string distv;
  double ylo = 0, yhi = 0, pointsv = 0;
  auto* dist_opt = rate_cmd->add_option("--dist", distv, "law");
  auto* points_opt = rate_cmd->add_option("--points", pointsv, "rows");
  auto* ylo_opt = rate_cmd->add_option("--y-lo", ylo, "first y");
  auto* yhi_opt = rate_cmd->add_option("--y-hi", yhi, "last y");
  add_common(rate_cmd);

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "convergence study");
  std::string namev;
  auto* name_opt = exp_cmd->add_option("--name", namev, "experiment name");
  add_common(exp_cmd);

  std::vector<const char*> argv;
  argv.push_back("canontilt");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    RunConfig c;
    c.command = "help";
    return c;
  } catch (const CLI::ParseError& e) {
    fail(ErrorKind::BadConfig, e.what());
  }

  RunConfig cfg;
  const nlohmann::json file = load_config(config_path);
  // flags override config; config overrides defaults
  auto pick_num = [&](const char* key, CLI::Option* opt, double flag_value,
                      nlohmann::json& dst) {
    if (opt->count() > 0)
      dst[key] = flag_value;
    else if (file.contains(key))
      dst[key] = num_of(file.at(key), key);
  };
  auto pick_str = [&](const char* key, CLI::Option* opt,
                      const std::string& flag_value, nlohmann::json& dst) {
    if (opt->count() > 0)
      dst[key] = flag_value;
    else if (file.contains(key))
      dst[key] = str_of(file.at(key), key);
  };
  auto require = [&](const char* key, const nlohmann::json& dst,
                     const std::string& cmd) {
    if (!dst.contains(key))
      fail(ErrorKind::BadConfig, cmd + " requires '" + std::string(key) + "'");
  };

  const bool seed_given = std::any_of(
      seed_opts.begin(), seed_opts.end(),
      [](CLI::Option* o) { return o->count() > 0; });
  if (!seed_given && file.contains("seed")) {
    if (!file.at("seed").is_number_integer() || file.at("seed").get<double>() < 0)
      fail(ErrorKind::BadConfig, "seed must be a nonnegative integer");
    seed = file.at("seed").get<std::uint64_t>();
  }
  cfg.seed = seed;

  const bool format_given = std::any_of(
      format_opts.begin(), format_opts.end(),
      [](CLI::Option* o) { return o->count() > 0; });
  if (!format_given && (out_path == "json" || out_path == "csv")) {
    format = out_path;  // `--out csv` shorthand for stdout in that format
    out_path.clear();
  }
  cfg.format = format;
  cfg.out_path = out_path;

  if (tilt_cmd->parsed()) {
    cfg.command = "tilt";
    check_keys(file,
               {"law", "family", "rate", "mu", "sigma2", "shape", "a", "b",
                "mean", "table", "lambda", "route", "seed"},
               cfg.command);
    // assemble the law string from the family plus its parameter flags
    std::string law;
    if (fam_opt->count() > 0)
      law = family;
    else if (file.contains("law"))
      law = str_of(file.at("law"), "law");
    else if (file.contains("family"))
      law = str_of(file.at("family"), "family");
    else
      fail(ErrorKind::BadConfig, "tilt requires --family");
    if (law.find(':') == std::string::npos) {
      auto field = [&](const char* key, CLI::Option* opt, double flag_value) {
        if (opt->count() > 0) return flag_value;
        if (file.contains(key)) return num_of(file.at(key), key);
        fail(ErrorKind::BadConfig, "family '" + law + "' needs --" + key);
      };
      if (law == "exponential" || law == "exp") {
        law = "exp:" + law_num(field("rate", rate_opt, rate));
      } else if (law == "normal") {
        law = "normal:" + law_num(field("mu", mu_opt, mu)) + "," +
              law_num(field("sigma2", sig_opt, sigma2));
      } else if (law == "poisson" || law == "pois") {
        law = "pois:" + law_num(field("mean", mean_opt, mean));
      } else if (law == "gamma") {
        law = "gamma:" + law_num(field("shape", shape_opt, shape)) + "," +
              law_num(field("rate", rate_opt, rate));
      } else if (law == "uniform") {
        law = "uniform:" + law_num(field("a", a_opt, av)) + "," +
              law_num(field("b", b_opt, bv));
      } else if (law == "table") {
        std::string path = table_path;
        if (table_opt->count() == 0) {
          if (!file.contains("table"))
            fail(ErrorKind::BadConfig, "family 'table' needs --table");
          path = str_of(file.at("table"), "table");
        }
        law = "table:" + path;
      } else {
        fail(ErrorKind::BadConfig,
             "unknown family '" + law + "'; " + kLawGrammar);
      }
    }
    cfg.params["law"] = law;
    pick_num("lambda", lambda_opt, lambda, cfg.params);
    require("lambda", cfg.params, "tilt");
    pick_str("route", route_opt, route, cfg.params);
    if (!cfg.params.contains("route")) cfg.params["route"] = "user";
  } else if (cond_cmd->parsed()) {
    cfg.command = "condition";
    check_keys(file, {"x", "y", "h", "delta", "mc", "joint", "seed"},
               cfg.command);
    pick_str("x", x_opt, xs, cfg.params);
    pick_str("y", y_opt, ys, cfg.params);
    pick_num("h", h_opt, hv, cfg.params);
    pick_num("delta", d_opt, dv, cfg.params);
    pick_num("mc", mc_opt, mcv, cfg.params);
    if (file.contains("joint")) cfg.params["joint"] = file.at("joint");
    require("x", cfg.params, "condition");
    require("y", cfg.params, "condition");
    require("h", cfg.params, "condition");
    require("delta", cfg.params, "condition");
    if (!cfg.params.contains("mc")) cfg.params["mc"] = 0.0;
  } else if (div_cmd->parsed()) {
    cfg.command = "divergence";
    check_keys(file, {"p", "q", "seed"}, cfg.command);
    pick_str("p", p_opt, pv, cfg.params);
    pick_str("q", q_opt, qv, cfg.params);
    require("p", cfg.params, "divergence");
    require("q", cfg.params, "divergence");
  } else if (rate_cmd->parsed()) {
    cfg.command = "ratefn";
    check_keys(file, {"dist", "points", "y_lo", "y_hi", "seed"}, cfg.command);
    pick_str("dist", dist_opt, distv, cfg.params);
    pick_num("points", points_opt, pointsv, cfg.params);
    pick_num("y_lo", ylo_opt, ylo, cfg.params);
    pick_num("y_hi", yhi_opt, yhi, cfg.params);
    require("dist", cfg.params, "ratefn");
    if (!cfg.params.contains("points")) cfg.params["points"] = 101.0;
  } else if (exp_cmd->parsed()) {
    cfg.command = "experiment";
    check_keys(file, {"name", "n_grid", "seed", "params", "text"},
               cfg.command);
    pick_str("name", name_opt, namev, cfg.params);
    require("name", cfg.params, "experiment");
    nlohmann::json grid = nlohmann::json::array();
    if (file.contains("n_grid")) {
      if (!file.at("n_grid").is_array())
        fail(ErrorKind::BadConfig, "n_grid must be an array of integers");
      grid = file.at("n_grid");
    }
    cfg.params["n_grid"] = grid;
    nlohmann::json pobj = nlohmann::json::object();
    if (file.contains("params")) {
      if (!file.at("params").is_object())
        fail(ErrorKind::BadConfig, "params must be an object");
      pobj = file.at("params");
    }
    cfg.params["params"] = pobj;
    nlohmann::json tobj = nlohmann::json::object();
    if (file.contains("text")) {
      if (!file.at("text").is_object())
        fail(ErrorKind::BadConfig, "text must be an object");
      tobj = file.at("text");
    }
    cfg.params["text"] = tobj;
  }
  return cfg;
}

RunOutput execute(const RunConfig& cfg) {
  if (cfg.command == "help") return {usage_text(""), 0};
  if (cfg.command == "tilt") return exec_tilt(cfg);
  if (cfg.command == "condition") return exec_condition(cfg);
  if (cfg.command == "divergence") return exec_divergence(cfg);
  if (cfg.command == "ratefn") return exec_ratefn(cfg);
  if (cfg.command == "experiment") return exec_experiment(cfg);
  fail(ErrorKind::BadConfig, "unknown command '" + cfg.command + "'");
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  std::string command;
  for (const auto& a : args)
    if (!a.empty() && a[0] != '-') {
      command = a;
      break;
    }
  try {
    const RunConfig cfg = parse_args(args);
    const RunOutput res = execute(cfg);
    if (cfg.out_path.empty())
      out << res.text;
    else
      write_text(cfg.out_path, res.text);
    return res.code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n\n" << usage_text(command);
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n\n" << usage_text(command);
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace canon::cli
