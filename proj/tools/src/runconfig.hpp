#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace ckt::cli {

// section -> key -> default value
using Schema = std::map<std::string, std::map<std::string, std::string>>;

struct RunConfig {
  std::string subcommand;
  Schema values;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  double tol = 0;
  bool has_tol = false;
  std::vector<std::string> outputs;

  const std::string& str(const std::string& section, const std::string& key) const;
  int integer(const std::string& section, const std::string& key) const;
  double real(const std::string& section, const std::string& key) const;
  std::string canonical() const;
  std::string hash_hex() const;
};

// Defaults from the schema overlaid with an INI file; unknown sections or keys throw.
RunConfig resolve(const std::string& subcommand, const Schema& schema, const std::string& config_path);

// Opens out_dir/name and writes the "#" header lines.
std::ofstream open_output(RunConfig& cfg, const std::string& name);

void write_manifest(const RunConfig& cfg);

struct Command {
  std::string description;
  Schema schema;
  bool uses_tol = false;
  double default_tol = 0;
  std::function<int(RunConfig&, std::ostream&)> body;
};

std::map<std::string, Command> commands();

}  // namespace ckt::cli
