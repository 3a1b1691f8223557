#include "ckt/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ckt/errors.hpp"
#include "runconfig.hpp"

namespace ckt::cli {

namespace fs = std::filesystem;

const std::string& RunConfig::str(const std::string& section, const std::string& key) const {
  auto s = values.find(section);
  if (s == values.end() || !s->second.count(key))
    throw ValidationError("config key " + section + "." + key + " is not defined for " + subcommand);
  return s->second.at(key);
}

int RunConfig::integer(const std::string& section, const std::string& key) const {
  const std::string& v = str(section, key);
  int x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ValidationError("config key " + section + "." + key + " must be an integer, got '" + v + "'");
  return x;
}

double RunConfig::real(const std::string& section, const std::string& key) const {
  const std::string& v = str(section, key);
  double x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ValidationError("config key " + section + "." + key + " must be a number, got '" + v + "'");
  return x;
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  os << "subcommand=" << subcommand << '\n' << "seed=" << seed << '\n';
  if (has_tol) os << "tol=" << std::setprecision(17) << tol << '\n';
  for (const auto& [sec, kv] : values) {
    os << '[' << sec << "]\n";
    for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
  }
  return os.str();
}

std::string RunConfig::hash_hex() const {
  // FNV-1a, 64 bit
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

RunConfig resolve(const std::string& subcommand, const Schema& schema, const std::string& config_path) {
  RunConfig cfg;
  cfg.subcommand = subcommand;
  cfg.values = schema;
  if (config_path.empty()) return cfg;
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(config_path, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError("cannot parse config " + config_path + ": " + e.message() + " (line " +
                          std::to_string(e.line()) + ")");
  }
  for (const auto& [sec, body] : pt) {
    auto s = cfg.values.find(sec);
    if (s == cfg.values.end()) {
      if (!body.data().empty()) throw ValidationError("config " + config_path + ": top-level key '" + sec + "' outside a section");
      throw ValidationError("config " + config_path + ": unknown section [" + sec + "] for " + subcommand);
    }
    for (const auto& [key, val] : body) {
      if (!s->second.count(key))
        throw ValidationError("config " + config_path + ": unknown key " + sec + "." + key + " for " + subcommand);
      s->second[key] = val.get_value<std::string>();
    }
  }
  return cfg;
}

namespace {

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

std::ofstream open_output(RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  const fs::path p = fs::path(cfg.out_dir) / name;
  std::ofstream os(p);
  if (!os) throw ValidationError("cannot open output " + p.string());
  os << "# ckt-lab " << cfg.subcommand << '\n'
     << "# config_hash=" << cfg.hash_hex() << " seed=" << cfg.seed << '\n'
     << "# generated=" << utc_timestamp() << '\n';
  cfg.outputs.push_back(name);
  return os;
}

void write_manifest(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  const fs::path p = fs::path(cfg.out_dir) / (cfg.subcommand + ".manifest.ini");
  std::ofstream os(p);
  if (!os) throw ValidationError("cannot open manifest " + p.string());
  os << "# generated=" << utc_timestamp() << '\n' << "# config_hash=" << cfg.hash_hex() << '\n';
  os << "[run]\nsubcommand=" << cfg.subcommand << "\nseed=" << cfg.seed << '\n';
  if (cfg.has_tol) os << "tol=" << std::setprecision(17) << cfg.tol << '\n';
  os << "outputs=";
  for (size_t i = 0; i < cfg.outputs.size(); ++i) os << (i ? "," : "") << cfg.outputs[i];
  os << '\n';
  for (const auto& [sec, kv] : cfg.values) {
    os << "\n[" << sec << "]\n";
    for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto cmds = commands();
  CLI::App app{"Conformal Killing tensor laboratory"};
  app.name("ckt-lab");
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  std::uint64_t seed = 1;
  double tol = 0;
  int dims_n = -1, dims_mmax = -1;
  std::map<std::string, CLI::App*> subs;
  std::map<std::string, CLI::Option*> tol_opts;
  CLI::Option* n_opt = nullptr;
  CLI::Option* mmax_opt = nullptr;
  for (const auto& [name, cmd] : cmds) {
    CLI::App* sc = app.add_subcommand(name, cmd.description);
    sc->add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
    sc->add_option("--seed", seed, "random seed");
    sc->add_option("--out", out_dir, "output directory");
    if (cmd.uses_tol) tol_opts[name] = sc->add_option("--tol", tol, "tolerance")->check(CLI::PositiveNumber);
    if (name == "dims") {
      n_opt = sc->add_option("--n", dims_n, "ambient dimension");
      mmax_opt = sc->add_option("--mmax", dims_mmax, "largest degree");
    }
    subs[name] = sc;
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "ckt-lab: error=usage message=\"" << one_line(e.what()) << "\"\n";
    return 2;
  }

  std::string name;
  for (const auto& [n, sc] : subs)
    if (sc->parsed()) name = n;
  try {
    const Command& cmd = cmds.at(name);
    RunConfig cfg = resolve(name, cmd.schema, config_path);
    cfg.out_dir = out_dir;
    cfg.seed = seed;
    if (cmd.uses_tol) {
      cfg.has_tol = true;
      cfg.tol = tol_opts[name]->count() ? tol : cmd.default_tol;
    }
    if (name == "dims") {
      if (n_opt->count()) cfg.values["dims"]["n"] = std::to_string(dims_n);
      if (mmax_opt->count()) cfg.values["dims"]["mmax"] = std::to_string(dims_mmax);
    }
    const int code = cmd.body(cfg, out);
    write_manifest(cfg);
    return code;
  } catch (const ConvergenceError& e) {
    err << "ckt-lab: error=convergence subcommand=" << name << " message=\"" << one_line(e.what()) << "\"\n";
    return 3;
  } catch (const ValidationError& e) {
    err << "ckt-lab: error=validation subcommand=" << name << " message=\"" << one_line(e.what()) << "\"\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "ckt-lab: error=validation subcommand=" << name << " message=\"" << one_line(e.what()) << "\"\n";
    return 2;
  }
}

}  // namespace ckt::cli
