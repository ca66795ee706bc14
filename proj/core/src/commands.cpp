#include "propas/commands.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "csv.hpp"
#include "propas/atomic_file.hpp"
#include "propas/blade_io.hpp"
#include "propas/config.hpp"
#include "propas/dataset.hpp"
#include "propas/errors.hpp"
#include "propas/evaluation.hpp"
#include "propas/model_json.hpp"
#include "propas/pipeline.hpp"
#include "propas/synthetic.hpp"
#include "propas/units.hpp"

namespace propas::cli {

namespace {

struct Context {
  std::string config_path;
  Config cfg;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  void load() {
    if (!config_path.empty()) cfg = load_config(config_path);
  }
};

std::vector<log::FlightRecord> read_log(const std::string& path, const Context& ctx) {
  auto ingest = log::ingest_flight_csv(path, ctx.cfg.units);
  if (ingest.dropped_nonfinite + ingest.dropped_negative_omega > 0) {
    *ctx.err << "warning: " << path << ": dropped " << ingest.dropped_nonfinite
             << " rows with non-finite fields and " << ingest.dropped_negative_omega
             << " rows with negative omega\n";
  }
  log::smooth(ingest.records, ctx.cfg.smoothing_window);
  return std::move(ingest.records);
}

void warn_all(const Context& ctx, const nlohmann::json& diagnostics) {
  if (!diagnostics.contains("warnings")) return;
  for (const auto& w : diagnostics.at("warnings"))
    *ctx.err << "warning: " << w.get<std::string>() << '\n';
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto f : csv::split(text)) {
    if (!f.empty()) out.emplace_back(f);
  }
  return out;
}

// ---------------------------------------------------------------- bem-gen

struct BemGenArgs {
  std::string geometry, polar, out;
};

void bem_gen(const BemGenArgs& a, Context& ctx) {
  const auto geom = bem::load_geometry(a.geometry);
  const auto polar = bem::load_polar(a.polar);
  bem::SweepRange omega = ctx.cfg.rpm_sweep;
  omega.min = units::rpm_to_rad_s(omega.min);
  omega.max = units::rpm_to_rad_s(omega.max);
  const auto rows = bem::generate_dataset(geom, polar, ctx.cfg.v_sweep, omega, ctx.cfg.env.rho);
  dataset::write_dataset(a.out, rows);
  const auto converged =
      std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.converged; });
  if (static_cast<std::size_t>(converged) != rows.size()) {
    *ctx.err << "warning: " << rows.size() - static_cast<std::size_t>(converged)
             << " grid points did not converge\n";
  }
  *ctx.out << nlohmann::json{{"rows", rows.size()}, {"converged", converged}, {"out", a.out}}.dump()
           << '\n';
}

// ---------------------------------------------------------------- fit-eta

struct FitEtaArgs {
  std::string dataset, log, out;
};

void fit_eta(const FitEtaArgs& a, Context& ctx) {
  const auto rows = dataset::read_dataset(a.dataset);
  const auto branch = dataset::forward_branch(rows);
  std::vector<gate::JcPoint> bem_points;
  for (const auto& r : dataset::usable_rows(rows)) bem_points.push_back({r.j, r.c_p});

  const auto records = read_log(a.log, ctx);
  const auto truth = eval::compute_airspeed_truth(records, ctx.cfg.env.lever_arm);
  const double d = ctx.cfg.env.diameter;
  std::vector<gate::JcPoint> flight_points;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!(r.omega > 0.0) || !pipeline::gate_record(r, truth[i], ctx.cfg.gate).pass) continue;
    const double j = models::advance_ratio(truth[i], r.omega, d);
    if (!(j > branch.j_crit)) continue;
    const double p_in = models::input_power({r.voltage, r.current, r.omega});
    flight_points.push_back(
        {j, models::power_coefficient(p_in, r.omega, r.rho.value_or(ctx.cfg.env.rho), d)});
  }
  if (flight_points.empty()) throw EmptyAfterGateError("fit-eta: no forward-flight samples");

  const auto est = models::estimate_efficiency(bem_points, flight_points);
  if (est.exceeds_unity) *ctx.err << "warning: estimated efficiency exceeds 1\n";
  const nlohmann::json j = {
      {"eta", est.eta},          {"exceeds_unity", est.exceeds_unity},    {"cubic", est.cubic.c},
      {"j_crit", branch.j_crit}, {"flight_points", flight_points.size()}, {"dataset", a.dataset}};
  save_json(a.out, j);
  *ctx.out << j.dump() << '\n';
}

// ---------------------------------------------------------------- discover / fit

struct DataArgs {
  std::string model = "direct";
  std::string dataset, log, out;
  std::string support;
};

std::vector<sparse::RegressionRecord> regression_records(const DataArgs& a, Context& ctx,
                                                         double* diameter, std::string* id) {
  if (!a.dataset.empty() == !a.log.empty())
    throw SchemaError("give exactly one of --dataset or --log");
  if (!a.dataset.empty()) {
    const auto rows = dataset::read_dataset(a.dataset);
    *id = a.dataset;
    const double d = dataset::infer_diameter(rows);
    *diameter = d > 0.0 ? d : ctx.cfg.env.diameter;
    return pipeline::bem_regression_records(rows);
  }
  *id = a.log;
  *diameter = ctx.cfg.env.diameter;
  return pipeline::flight_regression_records(read_log(a.log, ctx), ctx.cfg);
}

void discover(const DataArgs& a, Context& ctx) {
  const auto kind = parse_model_kind(a.model);
  pipeline::DiscoveryResult result;
  if (!a.dataset.empty() && a.log.empty()) {
    result = pipeline::discover_bem(dataset::read_dataset(a.dataset), kind, ctx.cfg, a.dataset);
  } else {
    double d = 0.0;
    std::string id;
    const auto records = regression_records(a, ctx, &d, &id);
    result = pipeline::discover_records(records, kind, ctx.cfg, id);
  }
  warn_all(ctx, result.model.diagnostics);
  save_model(a.out, result.model);
  *ctx.out << nlohmann::json{{"support", result.discovery.model.support},
                             {"lambda_selected", result.discovery.model.lambda_selected},
                             {"rows", result.rows}}
                  .dump()
           << '\n';
}

void fit(const DataArgs& a, Context& ctx) {
  const auto kind = parse_model_kind(a.model);
  double d = 0.0;
  std::string id;
  const auto records = regression_records(a, ctx, &d, &id);
  Config local = ctx.cfg;
  local.env.diameter = d;
  const auto support = a.support.empty() ? pipeline::default_support(kind) : split_list(a.support);
  const auto model = pipeline::fit_support(records, kind, support, local, id);
  save_model(a.out, model);
  *ctx.out << to_json(model).dump() << '\n';
}

// ---------------------------------------------------------------- identify-gps

struct IdentifyArgs {
  std::string model = "direct";
  std::string log, out, method = "batch", seed_model;
};

void identify(const IdentifyArgs& a, Context& ctx) {
  pipeline::IdentifyOptions opt;
  opt.kind = parse_model_kind(a.model);
  if (a.method != "batch" && a.method != "rls") throw SchemaError("--method must be batch or rls");
  opt.rls = a.method == "rls";
  if (!a.seed_model.empty()) opt.seed = load_model(a.seed_model);
  const auto records = read_log(a.log, ctx);
  auto result = pipeline::identify_gps(records, opt, ctx.cfg);
  result.model.training.dataset = a.log;
  warn_all(ctx, result.model.diagnostics);
  save_model(a.out, result.model);
  *ctx.out << to_json(result.model).dump() << '\n';
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
  std::string model_file, log, out;
};

constexpr const char* kEstimateHeader = "t_s,v_hat_mps,clamped";

void estimate(const EstimateArgs& a, Context& ctx) {
  const auto model = load_model(a.model_file);
  const auto records = read_log(a.log, ctx);
  const auto result = pipeline::estimate(model, records, ctx.cfg);
  write_atomically(a.out, [&](std::ostream& os) {
    os << kEstimateHeader << '\n';
    for (const auto& r : result.rows)
      os << csv::format(r.t) << ',' << csv::format(r.v_hat) << ',' << (r.clamped ? 1 : 0) << '\n';
  });
  *ctx.out << nlohmann::json{{"rows", result.rows.size()},
                             {"total", result.total},
                             {"gated_fraction", result.gated_fraction}}
                  .dump()
           << '\n';
}

struct EstimateSeries {
  std::vector<double> t, v_hat;
};

EstimateSeries read_estimates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || csv::trim(line) != kEstimateHeader) {
    throw SchemaError(path + ": expected header '" + kEstimateHeader + "'");
  }
  EstimateSeries s;
  while (std::getline(in, line)) {
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    const auto t = f.size() >= 2 ? csv::parse_field(f[0]) : std::nullopt;
    const auto v = f.size() >= 2 ? csv::parse_field(f[1]) : std::nullopt;
    if (!t || !v || !std::isfinite(*t) || !std::isfinite(*v))
      throw SchemaError(path + ": malformed row");
    s.t.push_back(*t);
    s.v_hat.push_back(*v);
  }
  return s;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string estimates, model_file, log, out;
  std::optional<double> range;
};

void evaluate(const EvaluateArgs& a, Context& ctx) {
  if (a.estimates.empty() == a.model_file.empty()) {
    throw SchemaError("give exactly one of --estimates or --model-file");
  }
  const auto records = read_log(a.log, ctx);
  const auto truth = eval::compute_airspeed_truth(records, ctx.cfg.env.lever_arm);

  std::vector<double> pred, ref;
  if (!a.model_file.empty()) {
    const auto result = pipeline::estimate(load_model(a.model_file), records, ctx.cfg);
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
      pred.push_back(result.rows[i].v_hat);
      ref.push_back(truth[result.source_index[i]]);
    }
  } else {
    std::map<double, std::size_t> by_time;
    for (std::size_t i = 0; i < records.size(); ++i) by_time.emplace(records[i].t, i);
    const auto series = read_estimates(a.estimates);
    for (std::size_t i = 0; i < series.t.size(); ++i) {
      const auto it = by_time.find(series.t[i]);
      if (it == by_time.end()) {
        throw SchemaError("estimate at t = " + csv::format(series.t[i]) + " has no log row");
      }
      pred.push_back(series.v_hat[i]);
      ref.push_back(truth[it->second]);
    }
  }
  const auto report = eval::evaluate(pred, ref, a.range, records.size());
  const auto j = eval::to_json(report);
  save_json(a.out, j);
  *ctx.out << j.dump() << '\n';
}

// ---------------------------------------------------------------- export-plot

struct ExportArgs {
  std::string kind, dataset, log, model_file, out;
};

void export_plot(const ExportArgs& a, Context& ctx) {
  if (a.kind == "cp-j") {
    if (a.dataset.empty()) throw SchemaError("export-plot cp-j needs --dataset");
    const auto rows = dataset::read_dataset(a.dataset);
    const auto branch = dataset::forward_branch(rows);
    write_atomically(a.out, [&](std::ostream& os) {
      os << "j,c_p,c_p_cubic,forward\n";
      for (const auto& r : dataset::usable_rows(rows)) {
        os << csv::format(r.j) << ',' << csv::format(r.c_p) << ',' << csv::format(branch.cubic(r.j))
           << ',' << (r.j > branch.j_crit ? 1 : 0) << '\n';
      }
    });
    *ctx.out << nlohmann::json{{"j_crit", branch.j_crit}, {"cubic", branch.cubic.c}}.dump() << '\n';
    return;
  }
  if (a.kind == "airspeed") {
    if (a.log.empty() || a.model_file.empty())
      throw SchemaError("export-plot airspeed needs --log and --model-file");
    const auto records = read_log(a.log, ctx);
    const auto model = load_model(a.model_file);
    const auto eta = pipeline::effective_eta(ctx.cfg, &model);
    const auto rates = pipeline::omega_rate(records);
    write_atomically(a.out, [&](std::ostream& os) {
      os << "t_s,v_truth_mps,v_hat_mps,gated\n";
      for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        std::optional<double> truth;
        if (r.v_pitot && r.omega_x)
          truth = models::pitot_correction(*r.v_pitot, *r.omega_x, ctx.cfg.env.lever_arm);
        std::optional<double> v_hat;
        bool gated = false;
        if (r.omega > 0.0) {
          v_hat = model.evaluate(pipeline::power_sample(r, eta), ctx.cfg.env, rates[i]).v_a;
          gated = pipeline::gate_record(r, *v_hat, ctx.cfg.gate).pass;
        }
        os << csv::format(r.t) << ',' << csv::format(truth) << ',' << csv::format(v_hat) << ','
           << (gated ? 1 : 0) << '\n';
      }
    });
    return;
  }
  throw SchemaError("export-plot: --kind must be cp-j or airspeed");
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string heading = "sweep";
  synthetic::FlightOptions opt;
};

void simulate(SimulateArgs a, Context& ctx) {
  if (a.heading == "sweep") {
    a.opt.heading = synthetic::HeadingProfile::kSweep;
  } else if (a.heading == "constant") {
    a.opt.heading = synthetic::HeadingProfile::kConstant;
  } else {
    throw SchemaError("--heading must be sweep or constant");
  }
  a.opt.seed = a.seed.value_or(ctx.cfg.simulate_seed);
  a.opt.env = ctx.cfg.env;
  const auto records = synthetic::simulate_flight(a.opt);
  log::write_flight_csv(std::filesystem::path(a.out), records);
  *ctx.out << nlohmann::json{{"rows", records.size()},
                             {"hover_rows", synthetic::hover_rows(a.opt)},
                             {"out", a.out}}
                  .dump()
           << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx;
  ctx.out = &out;
  ctx.err = &err;

  CLI::App app{"Propeller-based airspeed estimation toolkit", "propas"};
  app.set_version_flag("--version", "propas 0.1.0");
  app.add_option("-c,--config", ctx.config_path, "Configuration file")->check(CLI::ExistingFile);
  app.require_subcommand(1);

  std::function<void()> action;

  BemGenArgs bem_args;
  auto* bem_cmd = app.add_subcommand("bem-gen", "Generate a BEM (V_a, omega) performance grid");
  bem_cmd->add_option("--geometry", bem_args.geometry, "Blade geometry file")
      ->required()
      ->check(CLI::ExistingFile);
  bem_cmd->add_option("--polar", bem_args.polar, "Airfoil polar file")
      ->required()
      ->check(CLI::ExistingFile);
  bem_cmd->add_option("-o,--out", bem_args.out, "Output dataset CSV")->required();
  bem_cmd->callback([&] { action = [&] { bem_gen(bem_args, ctx); }; });

  FitEtaArgs eta_args;
  auto* eta_cmd = app.add_subcommand("fit-eta", "Estimate electro-mechanical efficiency");
  eta_cmd->add_option("--dataset", eta_args.dataset, "BEM dataset CSV")
      ->required()
      ->check(CLI::ExistingFile);
  eta_cmd->add_option("--log", eta_args.log, "Flight log CSV with pitot airspeed")
      ->required()
      ->check(CLI::ExistingFile);
  eta_cmd->add_option("-o,--out", eta_args.out, "Output JSON")->required();
  eta_cmd->callback([&] { action = [&] { fit_eta(eta_args, ctx); }; });

  DataArgs disc_args;
  auto* disc_cmd =
      app.add_subcommand("discover", "Sparse structure discovery with cross-validated LASSO");
  disc_cmd->add_option("--model", disc_args.model, "direct or indirect")
      ->check(CLI::IsMember({"direct", "indirect"}));
  disc_cmd->add_option("--dataset", disc_args.dataset, "BEM dataset CSV")->check(CLI::ExistingFile);
  disc_cmd->add_option("--log", disc_args.log, "Flight log CSV with pitot airspeed")
      ->check(CLI::ExistingFile);
  disc_cmd->add_option("-o,--out", disc_args.out, "Output model JSON")->required();
  disc_cmd->callback([&] { action = [&] { discover(disc_args, ctx); }; });

  DataArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Least-squares fit on a fixed support");
  fit_cmd->add_option("--model", fit_args.model, "direct or indirect")
      ->check(CLI::IsMember({"direct", "indirect"}));
  fit_cmd->add_option("--dataset", fit_args.dataset, "BEM dataset CSV")->check(CLI::ExistingFile);
  fit_cmd->add_option("--log", fit_args.log, "Flight log CSV with pitot airspeed")
      ->check(CLI::ExistingFile);
  fit_cmd->add_option("--support", fit_args.support, "Comma separated term names");
  fit_cmd->add_option("-o,--out", fit_args.out, "Output model JSON")->required();
  fit_cmd->callback([&] { action = [&] { fit(fit_args, ctx); }; });

  IdentifyArgs id_args;
  auto* id_cmd =
      app.add_subcommand("identify-gps", "Identify coefficients and wind from GPS velocity");
  id_cmd->add_option("--model", id_args.model, "direct or indirect")
      ->check(CLI::IsMember({"direct", "indirect"}));
  id_cmd->add_option("--log", id_args.log, "Flight log CSV")->required()->check(CLI::ExistingFile);
  id_cmd->add_option("--method", id_args.method, "batch or rls")
      ->check(CLI::IsMember({"batch", "rls"}));
  id_cmd
      ->add_option("--seed-model", id_args.seed_model, "Prior model JSON for gating and RLS start")
      ->check(CLI::ExistingFile);
  id_cmd->add_option("-o,--out", id_args.out, "Output model JSON")->required();
  id_cmd->callback([&] { action = [&] { identify(id_args, ctx); }; });

  EstimateArgs est_args;
  auto* est_cmd =
      app.add_subcommand("estimate", "Apply a model and the forward-flight gate to a log");
  est_cmd->add_option("-m,--model-file", est_args.model_file, "Model JSON")
      ->required()
      ->check(CLI::ExistingFile);
  est_cmd->add_option("--log", est_args.log, "Flight log CSV")
      ->required()
      ->check(CLI::ExistingFile);
  est_cmd->add_option("-o,--out", est_args.out, "Output estimate CSV")->required();
  est_cmd->callback([&] { action = [&] { estimate(est_args, ctx); }; });

  EvaluateArgs ev_args;
  auto* ev_cmd = app.add_subcommand("evaluate", "RMSE and NRMSE against pitot airspeed");
  ev_cmd->add_option("--estimates", ev_args.estimates, "Estimate CSV from `estimate`")
      ->check(CLI::ExistingFile);
  ev_cmd->add_option("-m,--model-file", ev_args.model_file, "Model JSON, estimated on the fly")
      ->check(CLI::ExistingFile);
  ev_cmd->add_option("--log", ev_args.log, "Flight log CSV")->required()->check(CLI::ExistingFile);
  ev_cmd->add_option("--range", ev_args.range, "NRMSE normalization range [m/s]")
      ->check(CLI::PositiveNumber);
  ev_cmd->add_option("-o,--out", ev_args.out, "Output report JSON")->required();
  ev_cmd->callback([&] { action = [&] { evaluate(ev_args, ctx); }; });

  ExportArgs ex_args;
  auto* ex_cmd = app.add_subcommand("export-plot", "Write CSV series for plotting");
  ex_cmd->add_option("--kind", ex_args.kind, "cp-j or airspeed")
      ->required()
      ->check(CLI::IsMember({"cp-j", "airspeed"}));
  ex_cmd->add_option("--dataset", ex_args.dataset, "BEM dataset CSV")->check(CLI::ExistingFile);
  ex_cmd->add_option("--log", ex_args.log, "Flight log CSV")->check(CLI::ExistingFile);
  ex_cmd->add_option("-m,--model-file", ex_args.model_file, "Model JSON")->check(CLI::ExistingFile);
  ex_cmd->add_option("-o,--out", ex_args.out, "Output CSV")->required();
  ex_cmd->callback([&] { action = [&] { export_plot(ex_args, ctx); }; });

  SimulateArgs sim_args;
  auto& so = sim_args.opt;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Write a synthetic flight log from known coefficients and wind");
  sim_cmd->add_option("-o,--out", sim_args.out, "Output flight CSV")->required();
  sim_cmd->add_option("--seed", sim_args.seed, "Noise seed (default from config)");
  sim_cmd->add_option("--beta1", so.truth.beta1, "True beta1")->capture_default_str();
  sim_cmd->add_option("--beta2", so.truth.beta2, "True beta2")->capture_default_str();
  sim_cmd->add_option("--wind-n", so.wind.v_wn, "North wind [m/s]")->capture_default_str();
  sim_cmd->add_option("--wind-e", so.wind.v_we, "East wind [m/s]")->capture_default_str();
  sim_cmd->add_option("--eta", so.eta, "Efficiency used to synthesize current")
      ->capture_default_str();
  sim_cmd->add_option("--rate", so.rate_hz, "Sample rate [Hz]")->capture_default_str();
  sim_cmd->add_option("--t0", so.t0, "First timestamp [s]")->capture_default_str();
  sim_cmd->add_option("--hover-s", so.hover_s, "Hover duration [s]")->capture_default_str();
  sim_cmd->add_option("--cruise-s", so.cruise_s, "Forward-flight duration [s]")
      ->capture_default_str();
  sim_cmd->add_option("--heading", sim_args.heading, "sweep or constant")
      ->check(CLI::IsMember({"sweep", "constant"}));
  sim_cmd->add_option("--heading0-deg", so.heading0, "Initial heading [deg]")
      ->transform([](std::string s) { return csv::format(units::deg_to_rad(std::stod(s))); });
  sim_cmd->add_option("--turn-period", so.turn_period_s, "Seconds per full turn")
      ->capture_default_str();
  sim_cmd->add_option("--airspeed-mean", so.airspeed_mean, "Mean airspeed [m/s]")
      ->capture_default_str();
  sim_cmd->add_option("--airspeed-amp", so.airspeed_amp, "Airspeed oscillation amplitude [m/s]")
      ->capture_default_str();
  sim_cmd->add_option("--noise", so.velocity_noise, "GPS velocity noise std [m/s]")
      ->capture_default_str();
  sim_cmd->add_flag("--steady", so.steady, "Constant airspeed and rotor state");
  sim_cmd->callback([&] { action = [&] { simulate(sim_args, ctx); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    ctx.load();
    if (action) action();
    return kOk;
  } catch (const EmptyAfterGateError& e) {
    err << "error: " << e.what() << '\n';
    return kEmptyAfterGate;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << '\n';
    return kSchema;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace propas::cli
