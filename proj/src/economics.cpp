#include "roamchain/economics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace roamchain::econ {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }
bool nonnegative_finite(double v) { return std::isfinite(v) && v >= 0.0; }

// m / (lambda theta_bar): the subscriber mass every revenue component scales with.
double subscriber_mass(const CountryMarket& mk) { return mk.m / (mk.lambda * mk.theta_bar); }

double total_of(const RevenueBreakdown& r) { return r.domestic + r.roaming + r.transit_in - r.transit_out; }

}  // namespace

void check_inputs(std::span<const CountryMarket> markets, std::span<const OperatorTariff> tariffs,
                  const ModelConfig& cfg) {
  if (markets.empty()) throw DomainError("at least one country is required");
  if (markets.size() != tariffs.size()) throw DomainError("one tariff per country is required");
  for (std::size_t i = 0; i < markets.size(); ++i) {
    const auto& mk = markets[i];
    if (!positive_finite(mk.m) || !positive_finite(mk.lambda) || !positive_finite(mk.theta_bar)) {
      throw DomainError("country " + std::to_string(i) + ": m, lambda and theta_bar must be > 0");
    }
    const auto& tf = tariffs[i];
    if (!nonnegative_finite(tf.p) || !nonnegative_finite(tf.c) || !nonnegative_finite(tf.t)) {
      throw DomainError("operator " + std::to_string(i) + ": p, c and t must be >= 0");
    }
  }
  if (!positive_finite(cfg.kappa)) throw DomainError("kappa must be > 0");
  if (!(cfg.beta >= 0.0 && cfg.beta <= 1.0)) throw DomainError("beta must lie in [0, 1]");
  if (!nonnegative_finite(cfg.t_max)) throw DomainError("t_max must be >= 0");
  if (!positive_finite(cfg.grid_step)) throw DomainError("grid_step must be > 0");
}

std::vector<RevenueBreakdown> revenue(std::span<const CountryMarket> markets,
                                      std::span<const OperatorTariff> tariffs, const ModelConfig& cfg) {
  check_inputs(markets, tariffs, cfg);
  const std::size_t n = markets.size();
  std::vector<RevenueBreakdown> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = out[i];
    const double own_mass = subscriber_mass(markets[i]);
    r.domestic = own_mass * tariffs[i].p;
    if (cfg.mode == RoamingMode::Blockchain) {
      // Visitors pay the VNO directly; no transit leg exists.
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) r.roaming += subscriber_mass(markets[j]) * tariffs[i].c;
    } else {
      r.roaming = own_mass * tariffs[i].c;
      if (!cfg.free_transit) {
        const double t_i = tariffs[i].t;
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          double in = subscriber_mass(markets[j]) * t_i;
          if (cfg.transit_demand == TransitDemand::Attenuated) {
            in *= std::exp(-markets[j].lambda * (markets[j].theta_bar + cfg.beta * t_i));
          }
          r.transit_in += in;
          r.transit_out += own_mass * tariffs[j].t;
        }
      }
    }
    r.total = total_of(r);
  }
  return out;
}

double effective_roaming_price(std::span<const OperatorTariff> tariffs, std::size_t i, const ModelConfig& cfg) {
  if (cfg.mode == RoamingMode::Blockchain) return 0.0;
  double foreign_t = 0.0;
  if (!cfg.free_transit && tariffs.size() > 1) {
    for (std::size_t j = 0; j < tariffs.size(); ++j)
      if (j != i) foreign_t += tariffs[j].t;
    foreign_t /= static_cast<double>(tariffs.size() - 1);
  }
  return tariffs[i].c + cfg.beta * foreign_t;
}

double domestic_surplus_term(const CountryMarket& mk, double p) {
  return mk.m * std::exp(-mk.lambda * mk.theta_bar) * (mk.theta_bar - p + 1.0 / mk.lambda);
}

double roaming_surplus_term(const CountryMarket& mk, double c_eff, double kappa) {
  // Users priced out (theta < c_eff) do not roam, so the truncation point is
  // max(theta_bar, c_eff). Without this the square grows again once c_eff
  // passes theta_bar + 1/lambda.
  const double a = std::max(mk.theta_bar, c_eff);
  const double d = a - c_eff;
  const double inv = 1.0 / mk.lambda;
  return kappa * mk.m * std::exp(-mk.lambda * a) * (d * d + 2.0 * d * inv + 2.0 * inv * inv);
}

SurplusReport consumer_surplus(std::span<const CountryMarket> markets, std::span<const OperatorTariff> tariffs,
                               const ModelConfig& cfg) {
  check_inputs(markets, tariffs, cfg);
  SurplusReport out;
  out.countries.resize(markets.size());
  for (std::size_t i = 0; i < markets.size(); ++i) {
    auto& cs = out.countries[i];
    cs.domestic = domestic_surplus_term(markets[i], tariffs[i].p);
    cs.roaming = roaming_surplus_term(markets[i], effective_roaming_price(tariffs, i, cfg), cfg.kappa);
    out.aggregate += cs.total();
  }
  return out;
}

PriceGrid PriceGrid::uniform(double p_max, double c_max, double step) {
  if (!(step > 0)) throw EmptyGrid("grid step must be > 0");
  auto axis = [step](double hi) {
    std::vector<double> v;
    if (!(hi >= 0)) return v;
    const auto n = static_cast<std::size_t>(std::floor(hi / step + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) v.push_back(static_cast<double>(k) * step);
    return v;
  };
  return {axis(p_max), axis(c_max)};
}

PriceOptimum optimize_prices(std::span<const CountryMarket> markets, std::span<const OperatorTariff> tariffs,
                             std::size_t i, const ModelConfig& cfg, const PriceGrid& grid) {
  if (grid.p_values.empty() || grid.c_values.empty()) throw EmptyGrid("price grid has no points");
  if (i >= markets.size()) throw DomainError("operator index out of range");
  std::vector<OperatorTariff> trial(tariffs.begin(), tariffs.end());
  std::vector<double> ps = grid.p_values;
  std::vector<double> cs = grid.c_values;
  std::sort(ps.begin(), ps.end());
  std::sort(cs.begin(), cs.end());

  PriceOptimum best;
  bool have = false;
  for (double p : ps) {
    for (double c : cs) {
      trial[i].p = p;
      trial[i].c = c;
      double r = revenue(markets, trial, cfg)[i].total;
      // Strict improvement keeps the earliest (smallest p, then c) on ties.
      if (!have || r > best.revenue) {
        best = {p, c, r, false};
        have = true;
      }
    }
  }
  best.on_boundary = best.p == ps.front() || best.p == ps.back() || best.c == cs.front() || best.c == cs.back();
  return best;
}

std::vector<double> transit_regulator(std::span<const CountryMarket> markets) {
  return std::vector<double>(markets.size(), 0.0);
}

std::vector<double> transit_grid(const ModelConfig& cfg) {
  std::vector<double> grid;
  const auto n = static_cast<std::size_t>(std::floor(cfg.t_max / cfg.grid_step + 1e-9));
  for (std::size_t k = 0; k <= n; ++k) grid.push_back(static_cast<double>(k) * cfg.grid_step);
  if (cfg.t_max - grid.back() > 1e-9 * std::max(1.0, cfg.t_max)) grid.push_back(cfg.t_max);
  return grid;
}

bool regulator_choice_maximizes_surplus(std::span<const CountryMarket> markets,
                                        std::span<const OperatorTariff> tariffs, const ModelConfig& cfg) {
  std::vector<OperatorTariff> trial(tariffs.begin(), tariffs.end());
  auto zeros = transit_regulator(markets);
  for (std::size_t i = 0; i < trial.size(); ++i) trial[i].t = zeros[i];
  const double base = consumer_surplus(markets, trial, cfg).aggregate;
  const double tol = 1e-12 * std::max(1.0, std::abs(base));
  for (std::size_t i = 0; i < trial.size(); ++i) {
    for (double g : transit_grid(cfg)) {
      trial[i].t = g;
      if (consumer_surplus(markets, trial, cfg).aggregate > base + tol) return false;
    }
    trial[i].t = 0.0;
  }
  return true;
}

NashResult transit_nash(std::span<const CountryMarket> markets, std::span<const OperatorTariff> tariffs,
                        const ModelConfig& cfg, std::size_t max_iterations) {
  ModelConfig game = cfg;
  game.mode = RoamingMode::Traditional;
  game.free_transit = false;
  game.transit_demand = TransitDemand::Attenuated;
  check_inputs(markets, tariffs, game);

  const auto grid = transit_grid(game);
  const std::size_t n = markets.size();
  std::vector<OperatorTariff> current(tariffs.begin(), tariffs.end());
  for (auto& tf : current) tf.t = 0.0;

  NashResult result;
  while (result.iterations < max_iterations) {
    ++result.iterations;
    std::vector<double> response(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto trial = current;
      double best_value = 0.0;
      bool have = false;
      for (double g : grid) {
        trial[i].t = g;
        double v = revenue(markets, trial, game)[i].total;
        if (!have || v > best_value) {
          best_value = v;
          response[i] = g;
          have = true;
        }
      }
    }
    bool unchanged = true;
    for (std::size_t i = 0; i < n; ++i) unchanged = unchanged && response[i] == current[i].t;
    for (std::size_t i = 0; i < n; ++i) current[i].t = response[i];
    if (unchanged) {
      result.converged = true;
      break;
    }
  }
  for (const auto& tf : current) {
    result.t.push_back(tf.t);
    if (tf.t == 0.0 || tf.t == grid.back()) result.corner = true;
  }
  return result;
}

std::string_view to_string(SweepParam param) {
  switch (param) {
    case SweepParam::P: return "p";
    case SweepParam::C: return "c";
    case SweepParam::T: return "t";
    case SweepParam::Lambda: return "lambda";
    case SweepParam::ThetaBar: return "theta_bar";
  }
  return "unknown";
}

std::string_view to_string(Direction direction) {
  switch (direction) {
    case Direction::Increases: return "Increases";
    case Direction::Decreases: return "Decreases";
    case Direction::Flat: return "Flat";
    case Direction::Mixed: return "Mixed";
  }
  return "Unknown";
}

std::optional<SweepParam> parse_sweep_param(std::string_view name) {
  for (auto p : {SweepParam::P, SweepParam::C, SweepParam::T, SweepParam::Lambda, SweepParam::ThetaBar}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

namespace {

std::vector<int> difference_signs(std::span<const double> values) {
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  const double tol = 1e-12 * std::max(scale, 1e-300);
  std::vector<int> signs;
  for (std::size_t k = 1; k < values.size(); ++k) {
    double d = values[k] - values[k - 1];
    signs.push_back(d > tol ? 1 : (d < -tol ? -1 : 0));
  }
  return signs;
}

}  // namespace

Direction classify(std::span<const double> values) {
  auto signs = difference_signs(values);
  if (signs.empty()) return Direction::Flat;
  if (std::all_of(signs.begin(), signs.end(), [](int s) { return s > 0; })) return Direction::Increases;
  if (std::all_of(signs.begin(), signs.end(), [](int s) { return s < 0; })) return Direction::Decreases;
  if (std::all_of(signs.begin(), signs.end(), [](int s) { return s == 0; })) return Direction::Flat;
  return Direction::Mixed;
}

bool rises_then_falls(std::span<const double> values) {
  auto signs = difference_signs(values);
  std::size_t k = 0;
  while (k < signs.size() && signs[k] > 0) ++k;
  if (k == 0 || k == signs.size()) return false;
  // A single flat step at the summit is allowed when the peak lands between grid points.
  if (signs[k] == 0) ++k;
  if (k == signs.size()) return false;
  for (; k < signs.size(); ++k)
    if (signs[k] >= 0) return false;
  return true;
}

SweepResult sweep(SweepParam param, std::span<const double> values, std::span<const CountryMarket> markets,
                  std::span<const OperatorTariff> tariffs, const ModelConfig& cfg, std::size_t target) {
  if (values.size() < 3) throw BadRange("a sweep needs at least 3 points");
  if (target >= markets.size()) throw BadRange("sweep target out of range");
  for (double v : values)
    if (!std::isfinite(v)) throw BadRange("sweep values must be finite");

  SweepResult result;
  result.param = param;
  result.target = target;
  result.mode = cfg.mode;
  std::vector<CountryMarket> mk(markets.begin(), markets.end());
  std::vector<OperatorTariff> tf(tariffs.begin(), tariffs.end());
  std::vector<double> own, foreign, transit_in, cs;
  for (double v : values) {
    switch (param) {
      case SweepParam::P: tf[target].p = v; break;
      case SweepParam::C: tf[target].c = v; break;
      case SweepParam::T: tf[target].t = v; break;
      case SweepParam::Lambda: mk[target].lambda = v; break;
      case SweepParam::ThetaBar: mk[target].theta_bar = v; break;
    }
    SweepPoint pt{v, revenue(mk, tf, cfg), consumer_surplus(mk, tf, cfg)};
    own.push_back(pt.revenue[target].total);
    transit_in.push_back(pt.revenue[target].transit_in);
    double others = 0.0;
    for (std::size_t j = 0; j < pt.revenue.size(); ++j)
      if (j != target) others += pt.revenue[j].total;
    foreign.push_back(others);
    cs.push_back(pt.surplus.aggregate);
    result.points.push_back(std::move(pt));
  }
  result.own_revenue = classify(own);
  result.foreign_revenue = classify(foreign);
  result.own_transit_in = classify(transit_in);
  result.surplus = classify(cs);
  return result;
}

ExpectedTrend expected_trend(SweepParam param) {
  switch (param) {
    case SweepParam::P: return {Direction::Increases, Direction::Decreases};
    case SweepParam::C: return {Direction::Increases, Direction::Decreases};
    case SweepParam::T: return {Direction::Mixed, Direction::Decreases};
    case SweepParam::Lambda: return {Direction::Decreases, Direction::Decreases};
    case SweepParam::ThetaBar: return {std::nullopt, std::nullopt};
  }
  return {};
}

ComparisonReport compare_models(std::span<const CountryMarket> markets, std::span<const OperatorTariff> tariffs,
                                std::span<const double> lambda1_values, const ModelConfig& cfg) {
  if (markets.size() != 2) throw DomainError("model comparison needs exactly two countries");
  ModelConfig trad = cfg;
  trad.mode = RoamingMode::Traditional;
  trad.free_transit = true;
  ModelConfig chain = cfg;
  chain.mode = RoamingMode::Blockchain;

  ComparisonReport report;
  std::vector<CountryMarket> mk(markets.begin(), markets.end());
  std::vector<double> r1_trad, r1_bc, r1_gain, r2_gain, cs_trad, cs_bc;
  for (double l1 : lambda1_values) {
    mk[0].lambda = l1;
    ComparisonRow row;
    row.lambda1 = l1;
    row.traditional = {revenue(mk, tariffs, trad), consumer_surplus(mk, tariffs, trad)};
    row.blockchain = {revenue(mk, tariffs, chain), consumer_surplus(mk, tariffs, chain)};
    r1_trad.push_back(row.traditional.revenue[0].total);
    r1_bc.push_back(row.blockchain.revenue[0].total);
    r1_gain.push_back(r1_bc.back() - r1_trad.back());
    r2_gain.push_back(row.blockchain.revenue[1].total - row.traditional.revenue[1].total);
    cs_trad.push_back(row.traditional.surplus.aggregate);
    cs_bc.push_back(row.blockchain.surplus.aggregate);
    report.rows.push_back(std::move(row));
  }

  auto& ck = report.checks;
  ck.r1_decreasing_traditional = classify(r1_trad) == Direction::Decreases;
  ck.r1_decreasing_blockchain = classify(r1_bc) == Direction::Decreases;
  ck.r1_gain_increasing = classify(r1_gain) == Direction::Increases;
  ck.r2_gain_decreasing = classify(r2_gain) == Direction::Decreases;
  ck.surplus_decreasing_traditional = classify(cs_trad) == Direction::Decreases;
  ck.surplus_decreasing_blockchain = classify(cs_bc) == Direction::Decreases;
  ck.surplus_dominance = true;
  for (std::size_t k = 0; k < cs_trad.size(); ++k) {
    ck.surplus_dominance = ck.surplus_dominance && cs_bc[k] >= cs_trad[k];
  }
  ck.predicted_crossover = markets[0].m * markets[1].lambda * markets[1].theta_bar / (markets[1].m * markets[0].theta_bar);

  double scale = 0.0;
  for (double g : r2_gain) scale = std::max(scale, std::abs(g));
  const double tol = 1e-9 * std::max(scale, 1e-300);
  auto sign = [tol](double v) { return v > tol ? 1 : (v < -tol ? -1 : 0); };
  int last_sign = 0;
  std::size_t last_index = 0;
  for (std::size_t k = 0; k < r2_gain.size(); ++k) {
    int s = sign(r2_gain[k]);
    if (s == 0) continue;
    if (last_sign != 0 && s != last_sign) {
      ++ck.r2_gain_sign_changes;
      if (k - last_index > 1) {
        // Zero reached on a sample strictly between the two signed points.
        for (std::size_t z = last_index + 1; z < k; ++z) {
          if (sign(r2_gain[z]) == 0) {
            ck.r2_crossover = lambda1_values[z];
            break;
          }
        }
      } else {
        const double a = r2_gain[last_index], b = r2_gain[k];
        const double la = lambda1_values[last_index], lb = lambda1_values[k];
        ck.r2_crossover = la + (lb - la) * a / (a - b);
      }
    }
    last_sign = s;
    last_index = k;
  }
  return report;
}

std::vector<CountryMarket> reference_markets(double lambda1) {
  return {CountryMarket{1.0, lambda1, 1.0}, CountryMarket{2.0, 1.0, 1.0}};
}

}  // namespace roamchain::econ
