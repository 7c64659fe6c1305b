#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptree/mcmc.hpp"
#include "ptree/models.hpp"
#include "ptree/simulate.hpp"

namespace ptree {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Data file locations; relative paths are resolved against the config file's directory.
struct DataPaths {
  std::filesystem::path histories;
  std::filesystem::path counts;
  std::filesystem::path counts_manifest;
  std::filesystem::path recoveries;
  std::filesystem::path markings;
  std::filesystem::path recoveries_juvenile;
  std::filesystem::path recoveries_adult;
  std::filesystem::path markings_juvenile;
  std::filesystem::path markings_adult;
  std::filesystem::path resight_1;
  std::filesystem::path resight_2;
};

struct Config {
  ModelSpec spec;
  RunConfig run;
  std::string partition;
  DataPaths data;
  std::filesystem::path output = "out";
  TruthParams truth;
  std::uint64_t sim_seed = 1;
  // Normalised key = value pairs as read, used for hashing and re-emission.
  std::map<std::string, std::string> entries;

  std::string hash() const;  // 16 hex digits, FNV-1a over the sorted entries
};

struct SchemaEntry {
  const char* key;
  const char* type;  // string, int, uint, real, bool, reals, ints
  const char* help;
};
const std::vector<SchemaEntry>& config_schema();

// Flat `key = value` text; `#` starts a comment. Unknown keys, bad types and duplicates throw ConfigError.
Config parse_config(const std::string& text, const std::string& source = "<config>",
                    const std::filesystem::path& base_dir = {});
Config load_config(const std::filesystem::path& path);
// Serialises entries back to the flat format (sorted keys).
std::string format_config(const std::map<std::string, std::string>& entries);

// Partition family each model uses.
const char* default_partition(ModelKind kind);

}  // namespace ptree
