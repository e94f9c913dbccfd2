#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Two-sided roaming market: one operator per country. Revenue and consumer
// surplus follow the flat-rate/per-volume pricing model with exponentially
// distributed willingness-to-pay.
namespace roamchain::econ {

struct CountryMarket {
  double m = 1.0;          // potential users
  double lambda = 1.0;     // wealth rate, 1 / average willingness-to-pay
  double theta_bar = 1.0;  // subscription threshold
};

struct OperatorTariff {
  double p = 0.0;  // flat domestic subscription price
  double c = 0.0;  // per-volume roaming price
  double t = 0.0;  // transit price charged to foreign operators
};

enum class RoamingMode { Traditional, Blockchain };

/// Linear: transit_in_i = sum_j m_j t_i / (lambda_j theta_bar_j).
/// Attenuated: the same term times exp(-lambda_j (theta_bar_j + beta t_i)).
enum class TransitDemand { Linear, Attenuated };

struct ModelConfig {
  RoamingMode mode = RoamingMode::Traditional;
  double kappa = 1.0;  // roaming-utility weight
  double beta = 1.0;   // share of foreign transit passed through to roaming users
  double t_max = 5.0;
  double grid_step = 0.01;
  bool free_transit = false;
  TransitDemand transit_demand = TransitDemand::Linear;
};

struct RevenueBreakdown {
  double domestic = 0.0;
  double roaming = 0.0;
  double transit_in = 0.0;
  double transit_out = 0.0;
  double total = 0.0;
};

struct CountrySurplus {
  double domestic = 0.0;
  double roaming = 0.0;
  double total() const { return domestic + roaming; }
};

struct SurplusReport {
  std::vector<CountrySurplus> countries;
  double aggregate = 0.0;
};

class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws DomainError on non-positive or non-finite parameters, negative
/// prices, or mismatched vector sizes.
void check_inputs(std::span<const CountryMarket> markets, std::span<const OperatorTariff> tariffs,
                  const ModelConfig& cfg);

std::vector<RevenueBreakdown> revenue(std::span<const CountryMarket> markets,
                                      std::span<const OperatorTariff> tariffs, const ModelConfig& cfg);

/// Roaming price experienced by country i's users.
double effective_roaming_price(std::span<const OperatorTariff> tariffs, std::size_t i, const ModelConfig& cfg);

/// m e^{-lambda theta_bar} (theta_bar - p + 1/lambda), i.e. m E[(theta - p) 1{theta > theta_bar}].
double domestic_surplus_term(const CountryMarket& market, double p);
/// kappa m E[(theta - c)^2 1{theta > a}], a = max(theta_bar, c):
/// kappa m e^{-lambda a} [(a - c)^2 + 2(a - c)/lambda + 2/lambda^2].
double roaming_surplus_term(const CountryMarket& market, double c_eff, double kappa);

SurplusReport consumer_surplus(std::span<const CountryMarket> markets, std::span<const OperatorTariff> tariffs,
                               const ModelConfig& cfg);

// ---------------------------------------------------------------------------

struct PriceGrid {
  std::vector<double> p_values;
  std::vector<double> c_values;

  static PriceGrid uniform(double p_max, double c_max, double step);
};

struct PriceOptimum {
  double p = 0.0;
  double c = 0.0;
  double revenue = 0.0;
  bool on_boundary = false;  // optimum sits on the edge of the grid
};

class EmptyGrid : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Grid argmax of operator i's total revenue, other tariffs held fixed. Ties
/// go to the smallest p, then the smallest c.
PriceOptimum optimize_prices(std::span<const CountryMarket> markets, std::span<const OperatorTariff> tariffs,
                             std::size_t i, const ModelConfig& cfg, const PriceGrid& grid);

/// The regulator scheme: all transit prices zero.
std::vector<double> transit_regulator(std::span<const CountryMarket> markets);

/// Confirms CS(all t = 0) >= CS with any single operator's t moved to any
/// point of the [0, t_max] grid.
bool regulator_choice_maximizes_surplus(std::span<const CountryMarket> markets,
                                        std::span<const OperatorTariff> tariffs, const ModelConfig& cfg);

/// Points k * step for k = 0..floor(t_max / step), plus t_max if it is off-grid.
std::vector<double> transit_grid(const ModelConfig& cfg);

struct NashResult {
  std::vector<double> t;
  std::size_t iterations = 0;
  bool converged = false;
  bool corner = false;  // some equilibrium price sits at 0 or t_max
};

/// Synchronous best-response iteration over the transit grid, always with
/// attenuated transit demand. Starts from all-zero prices.
NashResult transit_nash(std::span<const CountryMarket> markets, std::span<const OperatorTariff> tariffs,
                        const ModelConfig& cfg, std::size_t max_iterations = 200);

// ---------------------------------------------------------------------------

enum class SweepParam { P, C, T, Lambda, ThetaBar };
enum class Direction { Increases, Decreases, Flat, Mixed };

std::string_view to_string(SweepParam param);
std::string_view to_string(Direction direction);
std::optional<SweepParam> parse_sweep_param(std::string_view name);

/// Classifies consecutive differences; |diff| <= 1e-12 * scale counts as zero.
Direction classify(std::span<const double> values);
/// True when values strictly rise to a single interior peak then strictly fall.
bool rises_then_falls(std::span<const double> values);

struct SweepPoint {
  double value = 0.0;
  std::vector<RevenueBreakdown> revenue;
  SurplusReport surplus;
};

struct SweepResult {
  SweepParam param = SweepParam::P;
  std::size_t target = 0;  // operator / country whose parameter moves
  RoamingMode mode = RoamingMode::Traditional;
  std::vector<SweepPoint> points;
  Direction own_revenue = Direction::Flat;
  Direction foreign_revenue = Direction::Flat;  // sum over the other operators
  Direction own_transit_in = Direction::Flat;
  Direction surplus = Direction::Flat;  // aggregate CS
};

class BadRange : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

SweepResult sweep(SweepParam param, std::span<const double> values, std::span<const CountryMarket> markets,
                  std::span<const OperatorTariff> tariffs, const ModelConfig& cfg, std::size_t target = 0);

/// The pricing model's expected direction of operator revenue and CS for a
/// sweep parameter. nullopt where no single direction is claimed.
struct ExpectedTrend {
  std::optional<Direction> revenue;
  std::optional<Direction> surplus;
};
ExpectedTrend expected_trend(SweepParam param);

// ---------------------------------------------------------------------------

struct ModeOutcome {
  std::vector<RevenueBreakdown> revenue;
  SurplusReport surplus;
};

struct ComparisonRow {
  double lambda1 = 0.0;
  ModeOutcome traditional;
  ModeOutcome blockchain;
};

struct ComparisonChecks {
  bool r1_decreasing_traditional = false;
  bool r1_decreasing_blockchain = false;
  bool r1_gain_increasing = false;   // R1bc - R1trad increasing in lambda1
  bool r2_gain_decreasing = false;   // R2bc - R2trad decreasing in lambda1
  std::size_t r2_gain_sign_changes = 0;
  std::optional<double> r2_crossover;  // lambda1 where the R2 gain crosses zero
  double predicted_crossover = 0.0;    // m1 lambda2 theta_bar2 / (m2 theta_bar1)
  bool surplus_dominance = false;      // CSbc >= CStrad everywhere
  bool surplus_decreasing_traditional = false;
  bool surplus_decreasing_blockchain = false;

  bool all() const {
    return r1_decreasing_traditional && r1_decreasing_blockchain && r1_gain_increasing && r2_gain_decreasing &&
           r2_gain_sign_changes == 1 && r2_crossover.has_value() && surplus_dominance &&
           surplus_decreasing_traditional && surplus_decreasing_blockchain;
  }
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  ComparisonChecks checks;
};

/// Evaluates both modes across lambda1 for a two-country market. The
/// traditional side uses the paid-roaming, free-transit case.
ComparisonReport compare_models(std::span<const CountryMarket> markets, std::span<const OperatorTariff> tariffs,
                                std::span<const double> lambda1_values, const ModelConfig& cfg);

/// The reference two-country market: m1 = 1, m2 = 2, lambda2 = 1.
std::vector<CountryMarket> reference_markets(double lambda1 = 1.0);

}  // namespace roamchain::econ
