#include "roamchain/scenario_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>

namespace roamchain {

namespace pt = boost::property_tree;

namespace {

struct Section {
  std::string path;
  const pt::ptree* tree;
  std::set<std::string> seen;

  std::optional<std::string> raw(const std::string& key) {
    seen.insert(key);
    auto child = tree->get_child_optional(pt::ptree::path_type(key, '\0'));
    if (!child) return std::nullopt;
    return child->data();
  }

  std::string field(const std::string& key) const { return path + "." + key; }

  std::string text(const std::string& key, std::string fallback) {
    auto v = raw(key);
    return v ? *v : fallback;
  }

  double number(const std::string& key, double fallback) {
    auto v = raw(key);
    if (!v) return fallback;
    double out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size()) throw ConfigError(field(key), "not a number: '" + *v + "'");
    return out;
  }

  std::uint64_t integer(const std::string& key, std::uint64_t fallback) {
    auto v = raw(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size()) {
      throw ConfigError(field(key), "not a non-negative integer: '" + *v + "'");
    }
    return out;
  }

  bool flag(const std::string& key, bool fallback) {
    auto v = raw(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "off") return false;
    throw ConfigError(field(key), "expected true/false, got '" + *v + "'");
  }

  template <class Amount>
  Amount amount(const std::string& key, Amount fallback) {
    auto v = raw(key);
    if (!v) return fallback;
    try {
      return Amount::parse(*v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(field(key), e.what());
    }
  }

  std::vector<std::size_t> index_list(const std::string& key) {
    std::vector<std::size_t> out;
    auto v = raw(key);
    if (!v || v->empty()) return out;
    std::size_t start = 0;
    while (start <= v->size()) {
      auto end = v->find(',', start);
      if (end == std::string::npos) end = v->size();
      std::string item = v->substr(start, end - start);
      std::size_t idx = 0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), idx);
      if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size()) {
        throw ConfigError(field(key), "expected comma-separated indices");
      }
      out.push_back(idx);
      start = end + 1;
    }
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, _] : *tree) {
      if (!seen.contains(key)) throw ConfigError(field(key), "unknown key");
    }
  }
};

struct SplitSections {
  std::map<std::string, const pt::ptree*> singles;
  std::map<std::string, std::map<std::size_t, const pt::ptree*>> indexed;
};

SplitSections split(const pt::ptree& root, const std::set<std::string>& singles,
                    const std::set<std::string>& indexed) {
  SplitSections out;
  for (const auto& [name, tree] : root) {
    auto dot = name.find('.');
    if (dot == std::string::npos) {
      if (!singles.contains(name)) throw ConfigError(name, "unknown section");
      out.singles[name] = &tree;
      continue;
    }
    auto kind = name.substr(0, dot);
    if (!indexed.contains(kind)) throw ConfigError(name, "unknown section");
    auto idx_text = name.substr(dot + 1);
    std::size_t idx = 0;
    auto [ptr, ec] = std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), idx);
    if (ec != std::errc{} || ptr != idx_text.data() + idx_text.size()) throw ConfigError(name, "bad section index");
    if (!out.indexed[kind].emplace(idx, &tree).second) throw ConfigError(name, "duplicate section");
  }
  for (const auto& [kind, items] : out.indexed) {
    std::size_t expect = 0;
    for (const auto& [idx, _] : items) {
      if (idx != expect) throw ConfigError(kind + "." + std::to_string(expect), "missing section");
      ++expect;
    }
  }
  return out;
}

pt::ptree read_ini(std::istream& in) {
  pt::ptree root;
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("<file>", e.message() + " at line " + std::to_string(e.line()));
  }
  return root;
}

const pt::ptree& empty_tree() {
  static const pt::ptree empty;
  return empty;
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0; }

}  // namespace

void validate_config(const ScenarioConfig& cfg) {
  if (cfg.countries.empty()) throw ConfigError("country", "at least one country is required");
  if (cfg.operators.empty()) throw ConfigError("operator", "at least one operator is required");
  for (std::size_t i = 0; i < cfg.countries.size(); ++i) {
    const auto& c = cfg.countries[i];
    auto path = "country." + std::to_string(i);
    if (!finite_positive(c.m)) throw ConfigError(path + ".m", "must be > 0");
    if (!finite_positive(c.lambda)) throw ConfigError(path + ".lambda", "must be > 0");
    if (!finite_positive(c.theta_bar)) throw ConfigError(path + ".theta_bar", "must be > 0");
  }
  std::uint64_t total_stake = 0;
  for (std::size_t i = 0; i < cfg.operators.size(); ++i) {
    const auto& op = cfg.operators[i];
    auto path = "operator." + std::to_string(i);
    if (op.country >= cfg.countries.size()) throw ConfigError(path + ".country", "no such country");
    if (op.p.minor() < 0) throw ConfigError(path + ".p", "must be >= 0");
    if (op.c.minor() < 0) throw ConfigError(path + ".c", "must be >= 0");
    if (op.t.minor() < 0) throw ConfigError(path + ".t", "must be >= 0");
    if (op.initial_crypto.minor() < 0) throw ConfigError(path + ".initial_crypto", "must be >= 0");
    for (auto v : op.roam_preference) {
      if (v >= cfg.operators.size()) throw ConfigError(path + ".roam_preference", "no such operator");
      if (v == i) throw ConfigError(path + ".roam_preference", "an operator cannot be its own VNO");
    }
    total_stake += op.stake;
  }
  if (!(cfg.roam_fraction >= 0.0 && cfg.roam_fraction <= 1.0)) {
    throw ConfigError("scenario.roam_fraction", "must lie in [0, 1]");
  }
  if (cfg.ticks == 0) throw ConfigError("scenario.ticks", "must be >= 1");
  if (cfg.initial_wallet.minor() < 0) throw ConfigError("scenario.initial_wallet", "must be >= 0");
  if (!finite_positive(cfg.kappa)) throw ConfigError("scenario.kappa", "must be > 0");
  if (cfg.consensus.mode == ConsensusMode::PoW) {
    if (cfg.consensus.pow_target.is_zero()) throw ConfigError("consensus.pow_leading_zero_bits", "target is zero");
    if (cfg.consensus.pow_nonce_bound == 0) throw ConfigError("consensus.pow_nonce_bound", "must be > 0");
  } else if (total_stake == 0) {
    throw ConfigError("operator", "PoS needs at least one operator with stake > 0");
  }
}

ScenarioConfig parse_scenario(std::istream& in) {
  auto root = read_ini(in);
  auto parts = split(root, {"scenario", "consensus"}, {"country", "operator"});
  ScenarioConfig cfg;

  auto single = [&](const std::string& name) {
    auto it = parts.singles.find(name);
    return Section{name, it == parts.singles.end() ? &empty_tree() : it->second, {}};
  };

  {
    auto s = single("scenario");
    cfg.seed = s.integer("seed", cfg.seed);
    cfg.ticks = s.integer("ticks", cfg.ticks);
    cfg.roam_fraction = s.number("roam_fraction", cfg.roam_fraction);
    cfg.max_volume = static_cast<std::uint32_t>(s.integer("max_volume", cfg.max_volume));
    cfg.initial_wallet = s.amount("initial_wallet", cfg.initial_wallet);
    cfg.kappa = s.number("kappa", cfg.kappa);
    cfg.allowlist_policy = s.flag("allowlist_policy", cfg.allowlist_policy);
    s.reject_unknown();
  }
  {
    auto s = single("consensus");
    auto mode = s.text("mode", "pow");
    if (mode == "pow") cfg.consensus.mode = ConsensusMode::PoW;
    else if (mode == "pos") cfg.consensus.mode = ConsensusMode::PoS;
    else throw ConfigError("consensus.mode", "expected pow or pos");
    auto bits = s.integer("pow_leading_zero_bits", 8);
    if (bits > 255) throw ConfigError("consensus.pow_leading_zero_bits", "must be < 256");
    cfg.consensus.pow_target = Target::leading_zero_bits(static_cast<unsigned>(bits));
    cfg.consensus.pow_nonce_bound = s.integer("pow_nonce_bound", cfg.consensus.pow_nonce_bound);
    cfg.consensus.pos_seed = s.integer("pos_seed", cfg.seed);
    s.reject_unknown();
  }
  for (const auto& [idx, tree] : parts.indexed["country"]) {
    Section s{"country." + std::to_string(idx), tree, {}};
    CountryConfig c;
    c.name = s.text("name", "country" + std::to_string(idx));
    c.m = s.number("m", c.m);
    c.lambda = s.number("lambda", c.lambda);
    c.theta_bar = s.number("theta_bar", c.theta_bar);
    s.reject_unknown();
    cfg.countries.push_back(std::move(c));
  }
  for (const auto& [idx, tree] : parts.indexed["operator"]) {
    Section s{"operator." + std::to_string(idx), tree, {}};
    OperatorConfig op;
    op.name = s.text("name", "MNO" + std::to_string(idx));
    op.country = s.integer("country", 0);
    op.p = s.amount("p", op.p);
    op.c = s.amount("c", op.c);
    op.t = s.amount("t", op.t);
    try {
      if (auto r = s.raw("rate")) op.rate = ConversionRate::parse(*r);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(s.field("rate"), e.what());
    }
    op.users = static_cast<std::uint32_t>(s.integer("users", 0));
    op.stake = s.integer("stake", 0);
    op.initial_crypto = s.amount("initial_crypto", op.initial_crypto);
    op.participant = s.flag("participant", true);
    op.roam_preference = s.index_list("roam_preference");
    s.reject_unknown();
    cfg.operators.push_back(std::move(op));
  }
  validate_config(cfg);
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  return parse_scenario(in);
}

EconConfig parse_econ(std::istream& in) {
  auto root = read_ini(in);
  auto parts = split(root, {"model"}, {"country"});
  EconConfig cfg;
  {
    auto it = parts.singles.find("model");
    Section s{"model", it == parts.singles.end() ? &empty_tree() : it->second, {}};
    auto mode = s.text("mode", "traditional");
    if (mode == "traditional") cfg.model.mode = econ::RoamingMode::Traditional;
    else if (mode == "blockchain") cfg.model.mode = econ::RoamingMode::Blockchain;
    else throw ConfigError("model.mode", "expected traditional or blockchain");
    cfg.model.kappa = s.number("kappa", cfg.model.kappa);
    cfg.model.beta = s.number("beta", cfg.model.beta);
    cfg.model.t_max = s.number("t_max", cfg.model.t_max);
    cfg.model.grid_step = s.number("grid_step", cfg.model.grid_step);
    cfg.model.free_transit = s.flag("free_transit", cfg.model.free_transit);
    auto demand = s.text("transit_demand", "linear");
    if (demand == "linear") cfg.model.transit_demand = econ::TransitDemand::Linear;
    else if (demand == "attenuated") cfg.model.transit_demand = econ::TransitDemand::Attenuated;
    else throw ConfigError("model.transit_demand", "expected linear or attenuated");
    s.reject_unknown();
  }
  for (const auto& [idx, tree] : parts.indexed["country"]) {
    Section s{"country." + std::to_string(idx), tree, {}};
    econ::CountryMarket mk;
    econ::OperatorTariff tf;
    mk.m = s.number("m", mk.m);
    mk.lambda = s.number("lambda", mk.lambda);
    mk.theta_bar = s.number("theta_bar", mk.theta_bar);
    tf.p = s.number("p", tf.p);
    tf.c = s.number("c", tf.c);
    tf.t = s.number("t", tf.t);
    s.reject_unknown();
    cfg.markets.push_back(mk);
    cfg.tariffs.push_back(tf);
  }
  try {
    econ::check_inputs(cfg.markets, cfg.tariffs, cfg.model);
  } catch (const econ::DomainError& e) {
    throw ConfigError("model", e.what());
  }
  return cfg;
}

EconConfig load_econ(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  return parse_econ(in);
}

}  // namespace roamchain
