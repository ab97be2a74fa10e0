#pragma once

// Command-line front end. Every subcommand that draws random numbers
// requires an explicit --seed.

#include "pdreg/covpipe.hpp"
#include "pdreg/estimators.hpp"
#include "pdreg/idea.hpp"
#include "pdreg/io.hpp"
#include "pdreg/modelselect.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace pdreg::cli {

/// Truth names: wave-reg, spherical-reg, wave-cov (wave), exp-cov (exp),
/// wave:c=<c>, spherical:b=<b>,c=<c>, exp:c=<c>.
inline TruthFunction parse_truth(const std::string& text)
{
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  if (colon == std::string::npos) {
    if (name == "wave-reg")
      return TruthFunction::wave_reg();
    if (name == "spherical-reg")
      return TruthFunction::spherical_reg();
    if (name == "wave-cov" || name == "wave")
      return TruthFunction::wave_cov();
    if (name == "exp-cov" || name == "exp")
      return TruthFunction::exp_cov();
    throw config_error("field 'truth': unknown truth '" + text + "'");
  }
  std::optional<double> b, c;
  std::stringstream params(text.substr(colon + 1));
  std::string item;
  while (std::getline(params, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw config_error("field 'truth': expected key=value, found '" + item + "'");
    const std::string key = item.substr(0, eq);
    const double value = io::parse_double(item.substr(eq + 1), "field 'truth." + key + "'");
    if (key == "b")
      b = value;
    else if (key == "c")
      c = value;
    else
      throw config_error("field 'truth': unknown parameter '" + key + "'");
  }
  TruthFunction fn;
  if (name == "wave" && c && !b)
    fn = TruthFunction::wave(*c);
  else if (name == "exp" && c && !b)
    fn = TruthFunction::exponential(*c);
  else if (name == "spherical" && b && c)
    fn = TruthFunction::spherical(*b, *c);
  else
    throw config_error("field 'truth': unknown or incomplete truth '" + text + "'");
  fn.validate();
  return fn;
}

/// "lo:hi" or "lo:hi:step".
inline std::vector<double> parse_range(const std::string& text, const std::string& field)
{
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':'))
    parts.push_back(io::parse_double(item, "field '" + field + "'"));
  if (parts.size() < 2 || parts.size() > 3 || !(parts[0] < parts[1]))
    throw config_error("field '" + field + "': expected lo:hi or lo:hi:step with lo < hi, found '" + text + "'");
  if (parts.size() == 3 && !(parts[2] > 0.0))
    throw config_error("field '" + field + "': step must be > 0");
  return parts;
}

inline std::vector<double> grid_points(const std::string& text)
{
  const auto p = parse_range(text, "grid");
  if (p.size() != 3)
    throw config_error("field 'grid': expected lo:hi:step");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((p[1] - p[0]) / p[2] + 1e-9));
  for (std::size_t i = 0; i <= count; ++i)
    out.push_back(p[0] + static_cast<double>(i) * p[2]);
  return out;
}

inline std::vector<double> parse_list(const std::string& text, const std::string& field)
{
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(io::parse_double(item, "field '" + field + "'"));
  if (out.empty())
    throw config_error("field '" + field + "': empty list");
  return out;
}

inline std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& field)
{
  std::vector<std::size_t> out;
  for (double v : parse_list(text, field)) {
    if (!(v >= 1.0) || v != std::floor(v))
      throw config_error("field '" + field + "': entries must be positive integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

struct IdeaFlags
{
  double h = 0.1;
  std::size_t m = 5;
  std::size_t l = 0;
  double tau = 0.1;
  double kl_threshold = 1e-3;
  std::size_t kl_patience = 5;
  std::size_t max_iters = 200;

  void add(CLI::App* app, bool hm_required)
  {
    auto* ho = app->add_option("--h", h, "kernel bandwidth");
    auto* mo = app->add_option("--m", m, "pseudo data size");
    if (hm_required) {
      ho->required();
      mo->required();
    }
    app->add_option("--l", l, "population size (default 10 m)");
    app->add_option("--tau", tau, "acceptance rate");
    app->add_option("--kl-threshold", kl_threshold, "KL termination threshold");
    app->add_option("--kl-patience", kl_patience, "consecutive KL hits to stop");
    app->add_option("--max-iters", max_iters, "iteration cap");
  }

  IdeaConfig config(std::uint64_t seed) const
  {
    IdeaConfig c;
    c.h = h;
    c.m = m;
    c.l = l;
    c.tau = tau;
    c.kl_threshold = kl_threshold;
    c.kl_patience = kl_patience;
    c.max_iters = max_iters;
    c.seed = seed;
    return c;
  }
};

inline void write_trace_file(const std::string& path, const IdeaTrace& trace)
{
  auto out = io::open_out(path);
  io::write_trace(out, trace);
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
  CLI::App app{"Positive-definite radial regression and covariance estimation"};
  app.set_help_flag("--help", "print this help message and exit");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "print help for every subcommand and exit");

  // simulate-regression
  std::string truth_name, out_path, domain_text = "0:10";
  std::size_t n = 200;
  double noise_sd = 0.2;
  std::uint64_t seed = 0;
  auto* sim_reg = app.add_subcommand("simulate-regression", "draw (r, y) pairs from a truth plus Gaussian noise");
  sim_reg->add_option("--truth", truth_name, "truth function")->required();
  sim_reg->add_option("--n", n, "number of observations");
  sim_reg->add_option("--domain", domain_text, "input interval lo:hi");
  sim_reg->add_option("--noise-sd", noise_sd, "noise standard deviation");
  sim_reg->add_option("--seed", seed, "random seed")->required();
  sim_reg->add_option("--out", out_path, "output CSV")->required();

  // simulate-gp
  std::size_t w = 200;
  std::size_t gp_dim = 2;
  std::string gp_domain = "0:7.0710678118654755";
  auto* sim_gp = app.add_subcommand("simulate-gp", "simulate a mean-zero Gaussian field");
  sim_gp->add_option("--truth", truth_name, "covariance function")->required();
  sim_gp->add_option("--w", w, "number of locations");
  sim_gp->add_option("--domain", gp_domain, "side interval lo:hi of the square domain");
  sim_gp->add_option("--dim", gp_dim, "spatial dimension");
  sim_gp->add_option("--seed", seed, "random seed")->required();
  sim_gp->add_option("--out", out_path, "output CSV")->required();

  // fit
  std::string data_path, kind_name = "isotropic", kernel_name = "gaussian", trace_path;
  IdeaFlags fit_flags;
  auto* fit = app.add_subcommand("fit", "fit an estimator to regression data with IDEA");
  fit->add_option("--data", data_path, "regression CSV")->required();
  fit->add_option("--kind", kind_name, "isotropic | monotone | general");
  fit->add_option("--kernel", kernel_name, "gaussian | epanechnikov | uniform");
  fit_flags.add(fit, true);
  fit->add_option("--seed", seed, "random seed")->required();
  fit->add_option("--out", out_path, "output fit.json")->required();
  fit->add_option("--trace", trace_path, "output trace CSV");

  // cv
  std::string h_grid_text, m_grid_text;
  std::size_t folds = 5, replications = 1;
  IdeaFlags cv_flags;
  auto* cv = app.add_subcommand("cv", "k-fold cross validation over an (h, m) grid");
  cv->add_option("--data", data_path, "regression CSV")->required();
  cv->add_option("--kind", kind_name, "isotropic | monotone | general");
  cv->add_option("--kernel", kernel_name, "gaussian | epanechnikov | uniform");
  cv->add_option("--h-grid", h_grid_text, "comma-separated bandwidths");
  cv->add_option("--m-grid", m_grid_text, "comma-separated pseudo data sizes");
  cv->add_option("--k", folds, "number of folds");
  cv->add_option("--replications", replications, "replications per cell");
  cv_flags.add(cv, false);
  cv->add_option("--seed", seed, "random seed")->required();
  cv->add_option("--out", out_path, "output CSV")->required();

  // estimate-cov
  std::string field_path, points_path;
  std::optional<double> bin_width, rescale;
  std::size_t outer_iters = 3;
  IdeaFlags cov_flags;
  auto* est = app.add_subcommand("estimate-cov", "estimate a covariance function from a spatial field");
  auto* field_opt = est->add_option("--field", field_path, "field CSV");
  auto* points_opt = est->add_option("--points", points_path, "covariance point CSV");
  field_opt->excludes(points_opt);
  est->add_option("--kind", kind_name, "isotropic | monotone");
  est->add_option("--kernel", kernel_name, "gaussian | epanechnikov | uniform");
  cov_flags.add(est, true);
  est->add_option("--h-grid", h_grid_text, "run CV over these bandwidths first");
  est->add_option("--m-grid", m_grid_text, "run CV over these pseudo data sizes first");
  est->add_option("--bin-width", bin_width, "average point estimates within distance bins");
  est->add_option("--rescale-distances", rescale, "scale distances so the largest equals this value");
  est->add_option("--outer-iters", outer_iters, "variance refit rounds");
  est->add_option("--seed", seed, "random seed")->required();
  est->add_option("--out", out_path, "output fit.json")->required();
  est->add_option("--trace", trace_path, "trace CSV of the last round");

  // eval
  std::string fit_path, grid_text = "0:10:0.01";
  std::optional<std::string> eval_truth;
  bool want_rmspe = false;
  auto* ev = app.add_subcommand("eval", "evaluate a fitted estimator on a grid");
  ev->add_option("--fit", fit_path, "fit.json")->required();
  ev->add_option("--truth", eval_truth, "truth function for comparison");
  ev->add_option("--grid", grid_text, "lo:hi:step");
  ev->add_option("--out", out_path, "output curve CSV")->required();
  ev->add_flag("--rmspe", want_rmspe, "print the RMSPE against --truth over the grid");

  // plot
  std::string curve_path;
  std::optional<std::string> obs_path;
  auto* plot = app.add_subcommand("plot", "SVG of a curve with optional observations");
  plot->add_option("--curve", curve_path, "curve CSV")->required();
  plot->add_option("--points", obs_path, "regression CSV of observations");
  plot->add_option("--out", out_path, "output SVG")->required();

  // plot-trace
  auto* plot_trace = app.add_subcommand("plot-trace", "SVG of an IDEA trace");
  plot_trace->add_option("--trace", trace_path, "trace CSV")->required();
  plot_trace->add_option("--out", out_path, "output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*sim_reg) {
      const auto truth = parse_truth(truth_name);
      const auto dom = parse_range(domain_text, "domain");
      Rng rng(seed);
      const auto data = generate_regression(truth, n, dom[0], dom[1], noise_sd, rng);
      auto f = io::open_out(out_path);
      io::write_regression(f, data);
    } else if (*sim_gp) {
      const auto truth = parse_truth(truth_name);
      const auto dom = parse_range(gp_domain, "domain");
      Rng rng(seed);
      const auto field = simulate_gp(truth, w, Box::square(dom[0], dom[1], gp_dim), rng);
      auto f = io::open_out(out_path);
      io::write_field(f, field);
    } else if (*fit) {
      const auto data = io::read_regression(data_path);
      EstimatorSpec spec;
      spec.kind = parse_estimator_kind(kind_name);
      spec.kernel = {parse_kernel_family(kernel_name), fit_flags.h};
      spec.dim = spec.kind == EstimatorKind::general ? data.dim : 2;
      const IdeaConfig cfg = fit_flags.config(seed);
      const auto result = pdreg::run(data, spec, cfg);
      io::FitRecord rec{result.fit, result.trace, {{"command", "fit"}, {"idea", io::idea_config_json(cfg)}}};
      io::write_fit(out_path, rec);
      if (!trace_path.empty())
        write_trace_file(trace_path, result.trace);
      out << "iterations " << result.trace.iterations() << (result.trace.converged ? " converged" : " not converged")
          << " objective " << io::format_double(result.trace.final_objective()) << "\n";
    } else if (*cv) {
      const auto data = io::read_regression(data_path);
      EstimatorSpec spec;
      spec.kind = parse_estimator_kind(kind_name);
      spec.kernel = {parse_kernel_family(kernel_name), cv_flags.h};
      spec.dim = spec.kind == EstimatorKind::general ? data.dim : 2;
      CvConfig cfg;
      cfg.k = folds;
      cfg.seed = seed;
      cfg.replications = replications;
      if (!h_grid_text.empty())
        cfg.h_grid = parse_list(h_grid_text, "h-grid");
      if (!m_grid_text.empty())
        cfg.m_grid = parse_size_list(m_grid_text, "m-grid");
      const auto res = cross_validate(data, spec, cfg, cv_flags.config(seed));
      auto f = io::open_out(out_path);
      io::write_cv(f, res);
      out << "chosen h " << io::format_double(res.chosen_h) << " m " << res.chosen_m << " mse "
          << io::format_double(res.chosen_mse) << "\n";
    } else if (*est) {
      if (field_path.empty() && points_path.empty())
        throw config_error("estimate-cov: one of --field or --points is required");
      CovPointSet pts = field_path.empty() ? io::read_points(points_path) : matheron_points(io::read_field(field_path));
      double factor = 1.0;
      if (rescale)
        factor = rescale_distances(pts, *rescale);
      CovFitOptions opt;
      opt.kind = parse_estimator_kind(kind_name);
      opt.kernel = parse_kernel_family(kernel_name);
      opt.idea = cov_flags.config(seed);
      opt.outer_iters = outer_iters;
      opt.bin_width = bin_width;
      if (!h_grid_text.empty() || !m_grid_text.empty()) {
        CvConfig cfg;
        cfg.seed = seed;
        if (!h_grid_text.empty())
          cfg.h_grid = parse_list(h_grid_text, "h-grid");
        if (!m_grid_text.empty())
          cfg.m_grid = parse_size_list(m_grid_text, "m-grid");
        opt.cv = cfg;
      }
      const auto res = fit_covariance(pts, opt);
      nlohmann::json config{{"command", "estimate-cov"},
                            {"idea", io::idea_config_json(opt.idea)},
                            {"outer_iters", outer_iters},
                            {"distance_scale", factor},
                            {"sigma2_history", res.sigma2_history}};
      if (bin_width)
        config["bin_width"] = *bin_width;
      if (res.cv) {
        config["cv_chosen_h"] = res.cv->chosen_h;
        config["cv_chosen_m"] = res.cv->chosen_m;
      }
      io::FitRecord rec{res.fit, res.traces.back(), config};
      io::write_fit(out_path, rec);
      if (!trace_path.empty())
        write_trace_file(trace_path, res.traces.back());
      out << "pairs " << pts.size() << " sigma2 " << io::format_double(res.fit.sigma2) << " rounds "
          << res.traces.size() << (res.degenerate_update ? " (degenerate variance update)" : "") << "\n";
    } else if (*ev) {
      const auto rec = io::read_fit(fit_path);
      io::Curve curve;
      curve.r = grid_points(grid_text);
      std::optional<TruthFunction> truth;
      if (eval_truth)
        truth = parse_truth(*eval_truth);
      for (double r : curve.r) {
        curve.fit.push_back(evaluate(rec.fit, r));
        if (truth)
          curve.truth.push_back(truth_eval(*truth, r));
      }
      auto f = io::open_out(out_path);
      io::write_curve(f, curve);
      if (want_rmspe) {
        if (!truth)
          throw config_error("field 'truth': --rmspe needs --truth");
        out << "rmspe " << io::format_double(rmspe(rec.fit, *truth, curve.r)) << "\n";
      }
    } else if (*plot) {
      const auto curve = io::read_curve(curve_path);
      std::optional<RegressionDataset> obs;
      if (obs_path)
        obs = io::read_regression(*obs_path);
      io::write_file(out_path, io::plot_curve_svg(curve, obs ? &*obs : nullptr));
    } else if (*plot_trace) {
      io::write_file(out_path, io::plot_trace_svg(io::read_trace(trace_path)));
    }
  } catch (const std::exception& e) {
    err << "pdreg: error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

} // namespace pdreg::cli
