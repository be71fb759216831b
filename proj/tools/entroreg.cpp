// entroreg: optical-flow registration by transport-equation optimal control.
// Subcommands: register (full continuation run), transport (standalone
// forward solve), norms (functional evaluations as CSV), verify (property
// suite). Exit codes: 0 success, 2 usage/input error, 3 internal invariant
// violation.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <entroreg/error.hpp>
#include <entroreg/io.hpp>
#include <entroreg/registration.hpp>
#include <entroreg/verify.hpp>
#include <entroreg/version.hpp>

namespace er = entroreg;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& raw) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw er::InputError("config: key '" + key + "' has non-numeric value '" +
                         raw + "'");
  }
}

int parse_int(const std::string& key, const std::string& raw) {
  const double v = parse_double(key, raw);
  const int i = (int)v;
  if ((double)i != v)
    throw er::InputError("config: key '" + key + "' must be an integer");
  return i;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

er::RegistrationConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw er::InputError("config: cannot open '" + path + "'");
  const char* const keys[] = {"alpha",     "beta",      "sigma",
                              "time",      "gamma0",    "rho",
                              "levels",    "max_iters", "grad_tol",
                              "armijo_c1", "backtrack_tau", "nsub_min"};
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw er::InputError("config: line " + std::to_string(lineno) +
                           " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) throw er::InputError("config: unknown key '" + key + "'");
    if (kv.count(key)) throw er::InputError("config: duplicate key '" + key + "'");
    if (val.empty()) throw er::InputError("config: key '" + key + "' has no value");
    kv[key] = val;
  }
  for (const char* k : keys)
    if (!kv.count(k)) throw er::InputError(std::string("config: missing key '") + k + "'");

  er::RegistrationConfig cfg;
  cfg.alpha = parse_double("alpha", kv["alpha"]);
  cfg.beta = parse_double("beta", kv["beta"]);
  cfg.sigma = parse_double("sigma", kv["sigma"]);
  cfg.time = parse_double("time", kv["time"]);
  cfg.gamma0 = parse_double("gamma0", kv["gamma0"]);
  cfg.rho = parse_double("rho", kv["rho"]);
  cfg.levels.clear();
  for (const std::string& tok : split(kv["levels"], ',')) {
    if (tok.empty()) continue;
    const int n = parse_int("levels", tok);
    if (n < 2) throw er::InputError("config: key 'levels' entries must be >= 2");
    cfg.levels.push_back((std::size_t)n);
  }
  cfg.max_iters = parse_int("max_iters", kv["max_iters"]);
  cfg.grad_tol = parse_double("grad_tol", kv["grad_tol"]);
  cfg.armijo_c1 = parse_double("armijo_c1", kv["armijo_c1"]);
  cfg.backtrack_tau = parse_double("backtrack_tau", kv["backtrack_tau"]);
  cfg.nsub_min = parse_int("nsub_min", kv["nsub_min"]);
  cfg.validate();
  return cfg;
}

json config_json(const er::RegistrationConfig& cfg) {
  json j;
  j["alpha"] = cfg.alpha;
  j["beta"] = cfg.beta;
  j["sigma"] = cfg.sigma;
  j["time"] = cfg.time;
  j["gamma0"] = cfg.gamma0;
  j["rho"] = cfg.rho;
  j["levels"] = cfg.levels;
  j["max_iters"] = cfg.max_iters;
  j["grad_tol"] = cfg.grad_tol;
  j["armijo_c1"] = cfg.armijo_c1;
  j["backtrack_tau"] = cfg.backtrack_tau;
  j["nsub_min"] = cfg.nsub_min;
  return j;
}

er::ScalarField read_image(const std::string& path) {
  const auto dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".pgm") return er::read_pgm(path);
  return er::read_fld(path);
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw er::InputError("cannot write '" + path + "'");
  out << body;
  if (!out) throw er::InputError("failed while writing '" + path + "'");
}

// The manifest is the first artifact of every writing run.
void write_manifest(const std::filesystem::path& dir, const json& j) {
  std::filesystem::create_directories(dir);
  write_text((dir / "manifest.json").string(), j.dump(2) + "\n");
}

std::string fmt_g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

int cmd_register(const std::string& config_path, const std::string& phi0_path,
                 const std::string& target_path, const std::string& out_dir,
                 std::uint64_t seed) {
  const er::RegistrationConfig cfg = parse_config(config_path);
  er::RegistrationData data{read_image(phi0_path), read_image(target_path)};
  if (!data.phi0.grid.same_geometry(data.target.grid))
    throw er::InputError("register: image and target grids differ");

  json manifest;
  manifest["command"] = "register";
  manifest["version"] = er::kVersion;
  manifest["seed"] = seed;
  manifest["inputs"] = {{"config", config_path},
                        {"phi0", phi0_path},
                        {"target", target_path}};
  manifest["out"] = out_dir;
  manifest["config"] = config_json(cfg);
  const std::filesystem::path dir(out_dir);
  write_manifest(dir, manifest);

  const er::ContinuationResult res = er::continuation_solve(data, cfg);

  for (int j = 0; j < res.v.dim(); ++j)
    er::write_fld((dir / ("velocity.v" + std::to_string(j) + ".fld")).string(),
                  res.v.comp[(std::size_t)j]);
  er::TransportSetup ts{cfg.time,
                        er::default_substeps(res.v, cfg.time, cfg.nsub_min)};
  er::write_fld((dir / "transported.fld").string(),
                er::solve_forward(res.v, data.phi0, ts));

  std::string csv = "level,gamma,iters,j,reg_psi,reg_hs,f,grad_norm,wall_ms\n";
  for (const er::ContinuationStage& s : res.trace) {
    csv += std::to_string(s.level) + "," + fmt_g(s.gamma) + "," +
           std::to_string(s.iterations) + "," + fmt_g(s.j) + "," +
           fmt_g(s.reg_psi) + "," + fmt_g(s.reg_hs) + "," + fmt_g(s.f) + "," +
           fmt_g(s.grad_norm) + "," + fmt_g(s.wall_ms) + "\n";
  }
  write_text((dir / "trace.csv").string(), csv);

  for (const er::ContinuationStage& s : res.trace)
    std::printf("level %d (gamma %.6g): %d iters, f %.9e, |g| %.3e, %s\n",
                s.level, s.gamma, s.iterations, s.f, s.grad_norm,
                s.status.c_str());
  std::printf("psi0(v_final) %.9e\n", res.psi0);
  std::printf("f with psi replaced by psi0: %.9e\n", res.f_limit);
  return 0;
}

std::vector<std::string> velocity_paths(const std::string& arg, int dim) {
  std::vector<std::string> paths;
  if (arg.find(',') != std::string::npos) {
    paths = split(arg, ',');
  } else {
    for (int j = 0; j < dim; ++j) {
      const std::string p = arg + ".v" + std::to_string(j) + ".fld";
      if (!std::filesystem::exists(p)) break;
      paths.push_back(p);
    }
    if (paths.empty())
      throw er::InputError("transport: no velocity component files found at '" +
                           arg + ".v0.fld...'");
  }
  return paths;
}

int cmd_transport(const std::string& velocity_arg, const std::string& initial_path,
                  double time, int nsub, const std::string& out_dir) {
  const er::ScalarField phi0 = read_image(initial_path);
  const std::vector<std::string> vpaths =
      velocity_paths(velocity_arg, phi0.grid.dim());
  if ((int)vpaths.size() != phi0.grid.dim())
    throw er::InputError("transport: need one velocity component per dimension");
  er::VectorField v;
  v.grid = phi0.grid;
  for (const std::string& p : vpaths) {
    er::ScalarField c = er::read_fld(p);
    if (!c.grid.same_geometry(phi0.grid))
      throw er::InputError("transport: velocity grid of '" + p +
                           "' differs from the field grid");
    v.comp.push_back(std::move(c));
  }

  json manifest;
  manifest["command"] = "transport";
  manifest["version"] = er::kVersion;
  manifest["seed"] = 0;
  manifest["inputs"] = {{"velocity", vpaths}, {"initial", initial_path}};
  manifest["out"] = out_dir;
  manifest["config"] = {{"time", time}, {"nsub", nsub}};
  const std::filesystem::path dir(out_dir);
  write_manifest(dir, manifest);

  er::TransportSetup ts{time, nsub > 0 ? nsub : er::default_substeps(v, time, 8)};
  const er::ScalarField phiT = er::solve_forward(v, phi0, ts);
  if (er::max_abs(phiT) > er::max_abs(phi0))
    throw er::InternalError("transport: maximum principle violated");
  er::write_fld((dir / "transported.fld").string(), phiT);
  std::printf("transported %zu nodes over time %.6g in %d substeps\n",
              phiT.values.size(), time, ts.substeps);
  return 0;
}

int cmd_norms(const std::string& input_path, const std::string& gammas_arg) {
  const er::ScalarField f = read_image(input_path);
  std::vector<double> gammas;
  for (const std::string& tok : split(gammas_arg, ','))
    if (!tok.empty()) gammas.push_back(parse_double("gammas", tok));
  if (gammas.empty()) throw er::InputError("norms: empty gamma list");

  er::VectorField single;
  single.grid = f.grid;
  single.comp.push_back(f);
  const double psi0 = er::psi_zero(single);
  const double lux_exp = er::luxemburg_norm(f, er::YoungKind::Exp);
  const double lux_log = er::luxemburg_norm(f, er::YoungKind::Log);

  std::printf("gamma,E,chi,psi0_relevant,lux_exp,lux_log\n");
  for (double gamma : gammas)
    std::printf("%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", gamma,
                er::log_mean_exp(f, gamma), er::chi_gamma(f, gamma), psi0,
                lux_exp, lux_log);
  return 0;
}

int cmd_verify(const std::string& scope, std::uint64_t seed) {
  std::vector<er::CheckResult> checks;
  if (scope == "all")
    checks = er::verify_all(seed);
  else if (scope == "smoothmax")
    checks = er::verify_smoothmax(seed);
  else if (scope == "orlicz")
    checks = er::verify_orlicz(seed);
  else if (scope == "transport")
    checks = er::verify_transport(seed);
  else if (scope == "registration")
    checks = er::verify_registration(seed);
  else
    throw er::InputError("verify: unknown scope '" + scope + "'");

  int passed = 0;
  for (const er::CheckResult& c : checks) {
    std::printf("%s\n", er::format_check(c).c_str());
    if (c.pass) ++passed;
  }
  std::printf("verify: %d/%zu checks passed\n", passed, checks.size());
  return passed == (int)checks.size() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optical-flow registration via transport optimal control"};
  app.require_subcommand(1);

  auto* reg = app.add_subcommand("register", "run the gamma-continuation registration");
  std::string reg_config, reg_phi0, reg_target, reg_out = "out";
  std::uint64_t reg_seed = 1;
  reg->add_option("--config", reg_config, "key = value config file")->required();
  reg->add_option("--phi0", reg_phi0, "initial image (.fld or .pgm)")->required();
  reg->add_option("--target", reg_target, "target image (.fld or .pgm)")->required();
  reg->add_option("--out", reg_out, "output directory");
  reg->add_option("--seed", reg_seed, "seed recorded in the manifest");

  auto* tr = app.add_subcommand("transport", "forward transport of a field");
  std::string tr_velocity, tr_initial, tr_out = "out";
  double tr_time = 1.0;
  int tr_nsub = 0;
  tr->add_option("--velocity", tr_velocity,
                 "component files 'a,b' or family base ('v' -> v.v0.fld...)")
      ->required();
  tr->add_option("--initial", tr_initial, "field to transport")->required();
  tr->add_option("--time", tr_time, "transport time");
  tr->add_option("--nsub", tr_nsub, "substeps (0 = auto)");
  tr->add_option("--out", tr_out, "output directory");

  auto* no = app.add_subcommand("norms", "print functional values as CSV");
  std::string no_input, no_gammas = "1,0.1,0.01";
  no->add_option("--input", no_input, "field (.fld or .pgm)")->required();
  no->add_option("--gammas", no_gammas, "comma-separated gamma list");

  auto* ve = app.add_subcommand("verify", "run the property suite");
  std::string ve_scope = "all";
  std::uint64_t ve_seed = 1;
  ve->add_option("--scope", ve_scope,
                 "all|smoothmax|orlicz|transport|registration");
  ve->add_option("--seed", ve_seed, "seed for the randomized checks");

  try {
    app.parse(argc, argv);
    if (reg->parsed())
      return cmd_register(reg_config, reg_phi0, reg_target, reg_out, reg_seed);
    if (tr->parsed())
      return cmd_transport(tr_velocity, tr_initial, tr_time, tr_nsub, tr_out);
    if (no->parsed()) return cmd_norms(no_input, no_gammas);
    if (ve->parsed()) return cmd_verify(ve_scope, ve_seed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const er::InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const er::InternalError& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
  return 2;
}
