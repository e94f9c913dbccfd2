#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "roamchain/economics.hpp"
#include "roamchain/ledger.hpp"
#include "roamchain/money.hpp"

namespace roamchain {

/// Invalid configuration; `path()` names the offending key, e.g. "operator.1.rate".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& detail)
      : std::runtime_error(path + ": " + detail), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct CountryConfig {
  std::string name;
  double m = 1.0;
  double lambda = 1.0;
  double theta_bar = 1.0;
};

struct OperatorConfig {
  std::string name;
  std::size_t country = 0;
  Crypto p;  // domestic subscription price
  Crypto c;  // roaming price per volume unit charged to visitors
  Crypto t;  // transit price (reported only; the ledger carries no transit leg)
  ConversionRate rate{ConversionRate::Value::from_minor(ConversionRate::Value::kScale)};
  std::uint32_t users = 0;
  std::uint64_t stake = 0;  // PoS coins, created at tick 0
  Crypto initial_crypto;
  bool participant = true;  // on the registrar allowlist
  std::vector<std::size_t> roam_preference;  // VNO indices tried by this operator's roamers
};

struct ScenarioConfig {
  std::vector<CountryConfig> countries;
  std::vector<OperatorConfig> operators;
  std::uint64_t seed = 1;
  std::uint64_t ticks = 10;
  double roam_fraction = 0.3;
  std::uint32_t max_volume = 10;
  Fiat initial_wallet = Fiat::from_minor(100 * Fiat::kScale);
  double kappa = 1.0;
  bool allowlist_policy = false;
  ConsensusConfig consensus;
};

/// Checks every invariant; throws ConfigError naming the first bad field.
void validate_config(const ScenarioConfig& cfg);

/// INI-style key/value file; see configs/two_country.cfg for the schema.
ScenarioConfig parse_scenario(std::istream& in);
ScenarioConfig load_scenario(const std::filesystem::path& path);

struct EconConfig {
  std::vector<econ::CountryMarket> markets;
  std::vector<econ::OperatorTariff> tariffs;
  econ::ModelConfig model;
};

EconConfig parse_econ(std::istream& in);
EconConfig load_econ(const std::filesystem::path& path);

}  // namespace roamchain
