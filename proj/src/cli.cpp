#include "csbp/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "csbp/cumulant.hpp"
#include "csbp/flow.hpp"
#include "csbp/laplace.hpp"
#include "csbp/limit.hpp"
#include "csbp/parallel.hpp"
#include "csbp/verify.hpp"

namespace csbp::cli {

namespace {

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
  throw std::invalid_argument("config key '" + key + "': " + what);
}

double num_or(const nlohmann::json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) config_error(key, "expected a number");
  return j[key].get<double>();
}

std::vector<double> grid(const nlohmann::json& j, const std::string& key,
                         std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_array()) config_error(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j[key]) {
    if (!v.is_number()) config_error(key, "expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

ExtReal lambda_or_inf(const nlohmann::json& j, const std::string& key, ExtReal fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j[key];
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return ExtReal::infinity();
    config_error(key, "expected a positive number or \"inf\"");
  }
  if (!v.is_number() || v.get<double>() <= 0.0)
    config_error(key, "expected a positive number or \"inf\"");
  return ExtReal(v.get<double>());
}

std::ofstream open_output(const ExperimentConfig& cfg, const std::string& name) {
  std::filesystem::path dir(cfg.out_dir());
  if (!dir.empty()) std::filesystem::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw std::runtime_error("cannot open output file: " + (dir / name).string());
  out << std::setprecision(12);
  out << "# config_hash=" << cfg.hash() << "\n# seed=" << cfg.seed() << "\n";
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config file not readable: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config parse error in " + path + ": " + e.what());
  }
  return from_json(std::move(j));
}

ExperimentConfig ExperimentConfig::from_json(nlohmann::json j) {
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  ExperimentConfig cfg;
  cfg.doc = std::move(j);
  return cfg;
}

std::uint64_t ExperimentConfig::seed() const {
  if (!doc.contains("seed")) return 42;
  if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer())
    config_error("seed", "expected an integer");
  return doc["seed"].get<std::uint64_t>();
}

int ExperimentConfig::threads() const {
  if (!doc.contains("threads")) return 0;
  return doc["threads"].get<int>();
}

std::string ExperimentConfig::out_dir() const {
  if (!doc.contains("out_dir")) return ".";
  return doc["out_dir"].get<std::string>();
}

std::string ExperimentConfig::hash() const {
  nlohmann::json canon = doc;
  canon.erase("threads");
  canon.erase("out_dir");
  const std::string dump = canon.dump();  // nlohmann orders keys deterministically
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

BranchingMechanism ExperimentConfig::mechanism() const {
  if (!doc.contains("mechanism")) config_error("mechanism", "missing");
  return mechanism_from_json(doc["mechanism"]);
}

BranchingMechanism mechanism_from_json(const nlohmann::json& m) {
  if (!m.is_object()) config_error("mechanism", "expected an object");
  const double gamma = num_or(m, "gamma", 1.0);
  const double sigma2 = num_or(m, "sigma2", 0.0);
  if (m.contains("named")) {
    const std::string name = m["named"].get<std::string>();
    if (name == "feller") return BranchingMechanism::feller(sigma2 > 0.0 ? sigma2 : 2.0, gamma);
    if (name == "neveu") return BranchingMechanism::neveu(gamma);
    config_error("mechanism.named", "unknown mechanism name '" + name +
                                        "' (expected feller or neveu)");
  }
  if (!m.contains("levy")) return BranchingMechanism::feller(sigma2, gamma);
  const auto& levy = m["levy"];
  const std::string variant = levy.value("variant", "");
  const auto& params = levy.contains("params") ? levy["params"] : nlohmann::json::object();
  if (variant == "none") return BranchingMechanism::feller(sigma2, gamma);
  if (variant == "tempered_stable") {
    return BranchingMechanism::with_levy(
        sigma2, gamma,
        TemperedStable{num_or(params, "alpha", 0.5), num_or(params, "c", 1.0),
                       num_or(params, "tempering", 1.0)});
  }
  if (variant == "finite_compound") {
    const auto& jump = params.contains("jump") ? params["jump"] : nlohmann::json::object();
    const std::string law = jump.value("law", "exponential");
    JumpLaw jl;
    if (law == "exponential") jl = ExponentialJumps{num_or(jump, "rate", 1.0)};
    else if (law == "gamma")
      jl = GammaJumps{num_or(jump, "shape", 1.0), num_or(jump, "rate", 1.0)};
    else config_error("mechanism.levy.params.jump.law", "unknown jump law '" + law + "'");
    return BranchingMechanism::with_levy(sigma2, gamma,
                                         FiniteCompound{num_or(params, "rate", 1.0), jl});
  }
  config_error("mechanism.levy.variant",
               "unknown variant '" + variant +
                   "' (expected none, tempered_stable or finite_compound)");
}

nlohmann::json mechanism_to_json(const BranchingMechanism& m) {
  nlohmann::json j;
  j["gamma"] = m.gamma();
  j["sigma2"] = m.sigma2();
  if (m.is_neveu()) {
    j["named"] = "neveu";
    return j;
  }
  if (m.is_feller()) {
    j["named"] = "feller";
    return j;
  }
  if (const auto* ts = std::get_if<TemperedStable>(&m.levy())) {
    j["levy"] = {{"variant", "tempered_stable"},
                 {"params",
                  {{"alpha", ts->alpha}, {"c", ts->scale}, {"tempering", ts->tempering}}}};
  } else if (const auto* fc = std::get_if<FiniteCompound>(&m.levy())) {
    nlohmann::json jump;
    if (const auto* e = std::get_if<ExponentialJumps>(&fc->jumps))
      jump = {{"law", "exponential"}, {"rate", e->rate}};
    else {
      const auto& g = std::get<GammaJumps>(fc->jumps);
      jump = {{"law", "gamma"}, {"shape", g.shape}, {"rate", g.rate}};
    }
    j["levy"] = {{"variant", "finite_compound"},
                 {"params", {{"rate", fc->rate}, {"jump", jump}}}};
  }
  return j;
}

int run_v_table(const ExperimentConfig& cfg, std::ostream& log) {
  const auto params = cfg.doc.contains("v_table") ? cfg.doc["v_table"] : nlohmann::json::object();
  const CumulantSolver solver(cfg.mechanism());
  const auto t_grid = grid(params, "t_grid", {0.0, 0.5, 1.0, 2.0, 4.0});
  const auto lam_grid = grid(params, "lambda_grid", {0.1, 1.0, 10.0});
  const double theta = num_or(params, "theta", 1.0);

  auto out = open_output(cfg, "v_table.csv");
  out << "t,lambda,v,v_inf,kappa_lambda_theta\n";
  for (double t : t_grid) {
    const ExtReal vi = t > 0.0 ? solver.v_inf(t) : ExtReal::infinity();
    for (double lam : lam_grid) {
      out << t << "," << lam << "," << solver.v(t, lam) << ",";
      if (vi.is_infinite()) out << "inf";
      else out << vi.value();
      out << "," << solver.kappa_lambda(lam, theta) << "\n";
    }
  }
  log << "v-table written (" << t_grid.size() * lam_grid.size() << " rows)\n";
  return 0;
}

int run_simulate_lineages(const ExperimentConfig& cfg, std::ostream& log) {
  const auto params = cfg.doc.contains("simulate_lineages") ? cfg.doc["simulate_lineages"]
                                                            : nlohmann::json::object();
  const CumulantSolver solver(cfg.mechanism());
  const auto xs = grid(params, "x", {0.5, 1.0, 2.0});
  const auto levels = grid(params, "levels", {});
  LineageSimOptions opts;
  opts.horizon = num_or(params, "horizon", 1.0);
  opts.dt = num_or(params, "dt", 0.01);
  opts.delta = num_or(params, "delta", 1e-3);
  if (params.contains("method")) {
    const std::string m = params["method"].get<std::string>();
    if (m == "auto") opts.method = MarginalMethod::auto_select;
    else if (m == "feller_exact") opts.method = MarginalMethod::feller_exact;
    else if (m == "neveu_tilted_stable") opts.method = MarginalMethod::neveu_tilted_stable;
    else if (m == "generic_cdf_inversion") opts.method = MarginalMethod::generic_cdf_inversion;
    else config_error("simulate_lineages.method", "unknown sampler method '" + m + "'");
  }
  opts.record_trajectory = true;
  const auto replicas = static_cast<std::uint64_t>(num_or(params, "replicas", 4));

  auto out = open_output(cfg, "lineages.csv");
  out << "replica,t,x_index,state,coalesced_with\n";
  nlohmann::json coal_log = nlohmann::json::array();
  RngStream base(cfg.seed(), 1);
  for (std::uint64_t rep = 0; rep < replicas; ++rep) {
    RngStream rng = base.split(rep);
    const auto traj = simulate_lineages(solver, xs, levels, opts, rng);
    for (std::size_t k = 0; k < traj.times.size(); ++k)
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const int g = traj.groups[k][i];
        out << rep << "," << traj.times[k] << "," << i << "," << traj.states[k][i] << ","
            << (g == static_cast<int>(i) ? -1 : g) << "\n";
      }
    for (const auto& ev : traj.final_state.events)
      coal_log.push_back({{"replica", rep}, {"time", ev.time}, {"members", ev.members}});
  }
  {
    std::filesystem::path dir(cfg.out_dir());
    std::ofstream cl(dir / "coalescences.json");
    cl << nlohmann::json{{"config_hash", cfg.hash()},
                         {"seed", cfg.seed()},
                         {"events", coal_log}}
              .dump(2)
       << "\n";
  }
  log << "lineage trajectories written (" << replicas << " replicas)\n";
  return 0;
}

int run_simulate_limit(const ExperimentConfig& cfg, std::ostream& log) {
  const auto params = cfg.doc.contains("simulate_limit") ? cfg.doc["simulate_limit"]
                                                         : nlohmann::json::object();
  const CumulantSolver solver(cfg.mechanism());
  const ExtReal lam = lambda_or_inf(params, "lambda", ExtReal(1.0));
  const double y_max = num_or(params, "y_max", 100.0);
  double eps = num_or(params, "eps", -1.0);
  if (eps < 0.0) eps = LimitSampler::auto_eps(solver, lam);
  RngStream rng(cfg.seed(), 2);
  const auto path = simulate_W(solver, lam, y_max, eps, rng);

  auto wout = open_output(cfg, "w_path.csv");
  wout << "jump_time,jump_size\n";
  for (std::size_t i = 0; i < path.jump_times.size(); ++i)
    wout << path.jump_times[i] << "," << path.jump_sizes[i] << "\n";

  const double x_max = num_or(params, "x_max", 1e18);
  const auto part = ancestral_partition(path, x_max);
  auto pout = open_output(cfg, "partition.csv");
  pout << "family_index,left,right,age\n";
  for (std::size_t i = 0; i + 1 < part.boundaries.size(); ++i)
    pout << i + 1 << "," << part.boundaries[i] << "," << part.boundaries[i + 1] << ","
         << part.ages[i] << "\n";
  log << "limit subordinator written (" << path.jump_times.size() << " jumps, "
      << part.lengths.size() << " families; truncated mass rate "
      << path.truncated_mass_rate << ")\n";
  return 0;
}

int run_density(const ExperimentConfig& cfg, std::ostream& log) {
  const auto params =
      cfg.doc.contains("density") ? cfg.doc["density"] : nlohmann::json::object();
  const CumulantSolver solver(cfg.mechanism());
  const ExtReal lam = lambda_or_inf(params, "lambda", ExtReal::infinity());
  const double x = num_or(params, "x", 1.0);
  const auto u_grid = grid(params, "u_grid", {0.1, 0.5, 1.0, 2.0, 3.0, 5.0});
  const auto mc_paths = static_cast<std::uint64_t>(num_or(params, "mc_paths", 100000));
  const int n_max = static_cast<int>(num_or(params, "n_max", 64));
  const bool grey = solver.mechanism().grey_holds();

  auto out = open_output(cfg, "density.csv");
  out << "u,g_series,g_mc,mc_se\n";
  RngStream base(cfg.seed(), 3);
  std::uint64_t idx = 0;
  for (double u : u_grid) {
    const auto mc = density_g(solver, lam, x, u, mc_paths, base.split(idx++), cfg.threads());
    if (grey && lam.is_infinite())
      out << u << "," << density_g_grey(solver, x, u, n_max) << "," << mc.value << ","
          << mc.std_err << "\n";
    else out << u << ",," << mc.value << "," << mc.std_err << "\n";
  }
  log << "density table written (" << u_grid.size() << " rows)\n";
  return 0;
}

int run_verify(const ExperimentConfig& cfg, std::ostream& log) {
  const auto params = cfg.doc.contains("verify") ? cfg.doc["verify"] : nlohmann::json::object();
  verify::SuiteConfig sc;
  sc.seed = cfg.seed();
  sc.threads = cfg.threads();
  sc.replica_scale = num_or(params, "replica_scale", 1.0);
  if (params.contains("only"))
    for (const auto& name : params["only"]) sc.only.push_back(name.get<std::string>());

  const auto results = verify::run_suite(sc);
  verify::print_suite_table(log, results);
  auto report = verify::suite_report(results, sc);
  report["config_hash"] = cfg.hash();
  {
    std::filesystem::path dir(cfg.out_dir());
    if (!dir.empty()) std::filesystem::create_directories(dir);
    std::ofstream out(dir / "verify_report.json");
    out << report.dump(2) << "\n";
  }
  const bool pass = verify::suite_passes(results);
  log << (pass ? "suite: PASS\n" : "suite: FAIL\n");
  return pass ? 0 : 1;
}

}  // namespace csbp::cli
