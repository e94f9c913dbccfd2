#include "roamchain/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "roamchain/reports.hpp"
#include "roamchain/roamsim.hpp"
#include "roamchain/scenario_config.hpp"

namespace roamchain::cli {

namespace {

double parse_double(std::string_view text) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw UsageError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::vector<double> parse_range(std::string_view text) {
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    auto c1 = text.find(':');
    auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos || text.find(':', c2 + 1) != std::string_view::npos) {
      throw UsageError("range must be start:stop:step");
    }
    double start = parse_double(text.substr(0, c1));
    double stop = parse_double(text.substr(c1 + 1, c2 - c1 - 1));
    double step = parse_double(text.substr(c2 + 1));
    if (!(step > 0)) throw UsageError("range step must be > 0");
    if (stop < start) throw UsageError("range stop must be >= start");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) out.push_back(start + static_cast<double>(k) * step);
    return out;
  }
  std::size_t begin = 0;
  while (begin <= text.size()) {
    auto end = text.find(',', begin);
    if (end == std::string_view::npos) end = text.size();
    out.push_back(parse_double(text.substr(begin, end - begin)));
    begin = end + 1;
  }
  return out;
}

Command parse_args(const std::vector<std::string>& argv) {
  CLI::App app{"Blockchain roaming simulator and pricing-model analysis", "roamchain"};
  app.require_subcommand(1, 1);

  SimulateCmd sim;
  auto* simulate = app.add_subcommand("simulate", "Run an agent-based roaming scenario");
  simulate->add_option("--config", sim.config, "Scenario config file")->required();
  simulate->add_option("--out", sim.out, "Output directory")->required();

  EconSweepCmd sweep;
  std::string param, range;
  auto* econ_sweep = app.add_subcommand("econ-sweep", "Sweep one pricing-model parameter");
  econ_sweep->add_option("--config", sweep.config, "Economics config file")->required();
  econ_sweep->add_option("--param", param, "p | c | t | lambda | theta_bar")->required();
  econ_sweep->add_option("--range", range, "start:stop:step or comma list")->required();
  econ_sweep->add_option("--operator", sweep.target, "Index of the operator/country to vary");
  econ_sweep->add_option("--out", sweep.out, "Output directory");
  econ_sweep->add_flag("--assert", sweep.check, "Fail unless directions match the expected trends");

  EconCompareCmd compare;
  std::string lambdas = "0.25,0.5,1.0,1.5,2.0";
  auto* econ_compare = app.add_subcommand("econ-compare", "Traditional vs blockchain over lambda1");
  econ_compare->add_option("--config", compare.config, "Economics config file")->required();
  econ_compare->add_option("--lambda1", lambdas, "start:stop:step or comma list");
  econ_compare->add_option("--out", compare.out, "Output directory");
  econ_compare->add_flag("--assert", compare.check, "Fail unless every comparison check holds");

  EconNashCmd nash;
  auto* econ_nash = app.add_subcommand("econ-nash", "Transit-price Nash equilibrium");
  econ_nash->add_option("--config", nash.config, "Economics config file")->required();
  econ_nash->add_option("--out", nash.out, "Output directory");

  ValidateCmd validate;
  auto* validate_cmd = app.add_subcommand("validate", "Validate an exported chain file");
  validate_cmd->add_option("--chain", validate.chain, "Chain export file")->required();

  std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested(app.help("", CLI::AppFormatMode::All));
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (simulate->parsed()) return sim;
  if (econ_sweep->parsed()) {
    auto p = econ::parse_sweep_param(param);
    if (!p) throw UsageError("unknown sweep parameter '" + param + "'");
    sweep.param = *p;
    sweep.values = parse_range(range);
    return sweep;
  }
  if (econ_compare->parsed()) {
    compare.lambda1 = parse_range(lambdas);
    return compare;
  }
  if (econ_nash->parsed()) return nash;
  return validate;
}

namespace {

std::string render(auto&& writer) {
  std::ostringstream s;
  writer(s);
  return s.str();
}

int run_simulate(const SimulateCmd& cmd, std::ostream& out) {
  auto config = load_scenario(cmd.config);
  if (const char* env = std::getenv("ROAMCHAIN_SEED"); env != nullptr && *env != '\0') {
    std::string_view text(env);
    std::uint64_t seed = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw ConfigError("ROAMCHAIN_SEED", "not a non-negative integer");
    }
    config.seed = seed;
  }
  auto result = run_scenario(config);
  write_file(cmd.out, "chain.txt", render([&](std::ostream& s) { export_chain(result.chain, s); }));
  write_file(cmd.out, "world.jsonl", render([&](std::ostream& s) { export_world(result.world, s); }));
  write_file(cmd.out, "operators.csv", render([&](std::ostream& s) { write_operators_csv(result.metrics, s); }));
  auto summary = render([&](std::ostream& s) { write_summary(result.metrics, s); });
  write_file(cmd.out, "summary.txt", summary);
  out << summary;
  return Ok;
}

int run_sweep(const EconSweepCmd& cmd, std::ostream& out) {
  auto cfg = load_econ(cmd.config);
  if (cmd.target >= cfg.markets.size()) throw UsageError("--operator out of range");
  econ::SweepResult result;
  try {
    result = econ::sweep(cmd.param, cmd.values, cfg.markets, cfg.tariffs, cfg.model, cmd.target);
  } catch (const econ::BadRange& e) {
    throw UsageError(e.what());
  }
  auto table = render([&](std::ostream& s) { write_direction_table({result}, s); });
  if (cmd.out) {
    write_file(*cmd.out, "sweep.csv",
               render([&](std::ostream& s) { write_sweep_csv(result, cfg.markets.size(), s); }));
    write_file(*cmd.out, "directions.txt", table);
  }
  out << table;
  if (!cmd.check) return Ok;
  auto expected = econ::expected_trend(cmd.param);
  bool ok = (!expected.revenue || *expected.revenue == result.own_revenue) &&
            (!expected.surplus || *expected.surplus == result.surplus);
  out << "expected trend " << (ok ? "matched" : "NOT matched") << '\n';
  return ok ? Ok : CheckFailed;
}

int run_compare(const EconCompareCmd& cmd, std::ostream& out) {
  auto cfg = load_econ(cmd.config);
  if (cfg.markets.size() != 2) throw ConfigError("country", "econ-compare needs exactly two countries");
  auto report = econ::compare_models(cfg.markets, cfg.tariffs, cmd.lambda1, cfg.model);
  auto checks = render([&](std::ostream& s) { write_compare_checks(report, s); });
  if (cmd.out) {
    write_file(*cmd.out, "compare.csv", render([&](std::ostream& s) { write_compare_csv(report, s); }));
    write_file(*cmd.out, "compare.txt", checks);
  }
  out << checks;
  return !cmd.check || report.checks.all() ? Ok : CheckFailed;
}

int run_nash(const EconNashCmd& cmd, std::ostream& out) {
  auto cfg = load_econ(cmd.config);
  auto result = econ::transit_nash(cfg.markets, cfg.tariffs, cfg.model);
  auto csv = render([&](std::ostream& s) { write_nash_csv(result, s); });
  if (cmd.out) write_file(*cmd.out, "nash.csv", csv);
  out << csv;
  return result.converged ? Ok : CheckFailed;
}

int run_validate(const ValidateCmd& cmd, std::ostream& out) {
  std::ifstream in(cmd.chain);
  if (!in) throw IoError("cannot open " + cmd.chain.string());
  Chain chain;
  try {
    chain = import_chain(in);
  } catch (const DecodeError& e) {
    out << "decode error: " << e.what() << '\n';
    return CheckFailed;
  }
  auto report = validate_chain(chain);
  if (report.ok()) {
    out << "OK " << chain.size() << " blocks\n";
    return Ok;
  }
  for (const auto& f : report.faults) out << "block " << f.index << ": " << f.reason << '\n';
  out << "first invalid index " << *report.first_invalid() << '\n';
  return CheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  Command cmd;
  try {
    cmd = parse_args(argv);
  } catch (const HelpRequested& h) {
    out << h.what();
    return Ok;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\nrun with --help for usage\n";
    return Usage;
  }
  try {
    return std::visit(
        [&](const auto& c) -> int {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, SimulateCmd>) return run_simulate(c, out);
          else if constexpr (std::is_same_v<T, EconSweepCmd>) return run_sweep(c, out);
          else if constexpr (std::is_same_v<T, EconCompareCmd>) return run_compare(c, out);
          else if constexpr (std::is_same_v<T, EconNashCmd>) return run_nash(c, out);
          else return run_validate(c, out);
        },
        cmd);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return Usage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return Config;
  } catch (const econ::DomainError& e) {
    err << "config error: " << e.what() << '\n';
    return Config;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return Io;
  }
}

}  // namespace roamchain::cli
