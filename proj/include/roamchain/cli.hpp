#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "roamchain/economics.hpp"

namespace roamchain::cli {

enum ExitCode : int { Ok = 0, CheckFailed = 1, Usage = 2, Config = 3, Io = 4 };

struct SimulateCmd {
  std::filesystem::path config;
  std::filesystem::path out;
};

struct EconSweepCmd {
  std::filesystem::path config;
  econ::SweepParam param = econ::SweepParam::P;
  std::vector<double> values;
  std::size_t target = 0;
  std::optional<std::filesystem::path> out;
  bool check = false;
};

struct EconCompareCmd {
  std::filesystem::path config;
  std::vector<double> lambda1;
  std::optional<std::filesystem::path> out;
  bool check = false;
};

struct EconNashCmd {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
};

struct ValidateCmd {
  std::filesystem::path chain;
};

using Command = std::variant<SimulateCmd, EconSweepCmd, EconCompareCmd, EconNashCmd, ValidateCmd>;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for --help; carries the rendered help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "a:b:step" expands to a, a+step, ... up to b inclusive; "x,y,z" lists points.
std::vector<double> parse_range(std::string_view text);

/// argv[0] is the program name. Throws UsageError or HelpRequested.
Command parse_args(const std::vector<std::string>& argv);

/// Parses and executes; returns the process exit code.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace roamchain::cli
