#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "roamchain/economics.hpp"
#include "roamchain/roamsim.hpp"

namespace roamchain {

/// Six significant digits, '.' decimal point, independent of the global locale.
std::string format_number(double value);

void write_operators_csv(const MetricsReport& report, std::ostream& out);
void write_summary(const MetricsReport& report, std::ostream& out);

/// Header is emitted even when the sweep has no points.
void write_sweep_csv(const econ::SweepResult& result, std::size_t operators, std::ostream& out);
/// Direction rows in the layout of the revenue / consumer-surplus trend tables.
void write_direction_table(const std::vector<econ::SweepResult>& sweeps, std::ostream& out);

/// Two rows (traditional, blockchain) per lambda1 value.
void write_compare_csv(const econ::ComparisonReport& report, std::ostream& out);
void write_compare_checks(const econ::ComparisonReport& report, std::ostream& out);

void write_nash_csv(const econ::NashResult& result, std::ostream& out);

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes `content` to dir/name with LF line endings, creating dir if needed.
void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& content);

}  // namespace roamchain
