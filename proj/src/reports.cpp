#include "roamchain/reports.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

namespace roamchain {

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 6);
  if (ec != std::errc{}) return "nan";
  return {buf, ptr};
}

void write_operators_csv(const MetricsReport& report, std::ostream& out) {
  out << "operator,subscribers,visitors_served,domestic_revenue_fiat,roaming_revenue_fiat,"
         "transit_in_crypto,transit_out_crypto,crypto_balance_delta\n";
  for (const auto& op : report.operators) {
    out << op.code << ',' << op.subscribers << ',' << op.visitors_served << ',' << op.domestic_revenue.str() << ','
        << op.roaming_revenue.str() << ',' << op.transit_in.str() << ',' << op.transit_out.str() << ','
        << op.crypto_balance_delta.str() << '\n';
  }
}

void write_summary(const MetricsReport& report, std::ostream& out) {
  out << "blocks                 " << report.blocks << '\n';
  out << "transactions           " << report.transactions << '\n';
  out << "mnocs issued           " << report.mnocs_issued << '\n';
  out << "agreements p2p / chain " << report.agreements_peer_to_peer << " / " << report.agreements_blockchain << '\n';
  out << "consumer surplus       " << format_number(report.consumer_surplus) << '\n';
  out << "fiat debits / credits  " << report.fiat_debits.str() << " / " << report.fiat_credits.str() << '\n';
  out << "crypto debits / credits " << report.crypto_debits.str() << " / " << report.crypto_credits.str() << '\n';
  out << "insufficient funds     " << report.insufficient_funds << '\n';
  out << "access denied          " << report.access_denied << '\n';
  out << "sessions:\n";
  for (auto state : {SessionState::Requested, SessionState::TermsOffered, SessionState::Accepted,
                     SessionState::Rejected, SessionState::Active, SessionState::Settled}) {
    auto it = report.sessions.find(state);
    out << "  " << to_string(state) << ' ' << (it == report.sessions.end() ? 0 : it->second) << '\n';
  }
}

namespace {

std::string_view mode_name(econ::RoamingMode mode) {
  return mode == econ::RoamingMode::Traditional ? "traditional" : "blockchain";
}

void revenue_header(std::size_t operators, std::ostream& out) {
  for (std::size_t i = 0; i < operators; ++i) {
    out << ",domestic_" << i << ",roaming_" << i << ",transit_in_" << i << ",transit_out_" << i << ",total_" << i;
  }
  for (std::size_t i = 0; i < operators; ++i) out << ",cs_" << i;
  out << ",cs_aggregate,mode\n";
}

void revenue_cells(const std::vector<econ::RevenueBreakdown>& revenue, const econ::SurplusReport& cs,
                   econ::RoamingMode mode, std::ostream& out) {
  for (const auto& r : revenue) {
    out << ',' << format_number(r.domestic) << ',' << format_number(r.roaming) << ','
        << format_number(r.transit_in) << ',' << format_number(r.transit_out) << ',' << format_number(r.total);
  }
  for (const auto& c : cs.countries) out << ',' << format_number(c.total());
  out << ',' << format_number(cs.aggregate) << ',' << mode_name(mode) << '\n';
}

}  // namespace

void write_sweep_csv(const econ::SweepResult& result, std::size_t operators, std::ostream& out) {
  out << to_string(result.param);
  revenue_header(operators, out);
  for (const auto& pt : result.points) {
    out << format_number(pt.value);
    revenue_cells(pt.revenue, pt.surplus, result.mode, out);
  }
}

void write_direction_table(const std::vector<econ::SweepResult>& sweeps, std::ostream& out) {
  out << "parameter        ";
  for (const auto& s : sweeps) out << ' ' << to_string(s.param);
  out << "\noperator revenue ";
  for (const auto& s : sweeps) out << ' ' << to_string(s.own_revenue);
  out << "\nforeign revenue  ";
  for (const auto& s : sweeps) out << ' ' << to_string(s.foreign_revenue);
  out << "\nown transit in   ";
  for (const auto& s : sweeps) out << ' ' << to_string(s.own_transit_in);
  out << "\nconsumer surplus ";
  for (const auto& s : sweeps) out << ' ' << to_string(s.surplus);
  out << '\n';
}

void write_compare_csv(const econ::ComparisonReport& report, std::ostream& out) {
  const std::size_t operators = report.rows.empty() ? 2 : report.rows.front().traditional.revenue.size();
  out << "lambda1";
  revenue_header(operators, out);
  for (const auto& row : report.rows) {
    out << format_number(row.lambda1);
    revenue_cells(row.traditional.revenue, row.traditional.surplus, econ::RoamingMode::Traditional, out);
    out << format_number(row.lambda1);
    revenue_cells(row.blockchain.revenue, row.blockchain.surplus, econ::RoamingMode::Blockchain, out);
  }
}

void write_compare_checks(const econ::ComparisonReport& report, std::ostream& out) {
  const auto& c = report.checks;
  auto yes = [](bool b) { return b ? "yes" : "NO"; };
  out << "R1 decreasing in lambda1 (traditional)   " << yes(c.r1_decreasing_traditional) << '\n';
  out << "R1 decreasing in lambda1 (blockchain)    " << yes(c.r1_decreasing_blockchain) << '\n';
  out << "R1 blockchain gain increasing            " << yes(c.r1_gain_increasing) << '\n';
  out << "R2 blockchain gain decreasing            " << yes(c.r2_gain_decreasing) << '\n';
  out << "R2 gain sign changes                     " << c.r2_gain_sign_changes << '\n';
  out << "R2 gain crossover lambda1                "
      << (c.r2_crossover ? format_number(*c.r2_crossover) : std::string("none")) << '\n';
  out << "predicted crossover lambda1              " << format_number(c.predicted_crossover) << '\n';
  out << "CS blockchain >= traditional             " << yes(c.surplus_dominance) << '\n';
  out << "CS decreasing in lambda1 (traditional)   " << yes(c.surplus_decreasing_traditional) << '\n';
  out << "CS decreasing in lambda1 (blockchain)    " << yes(c.surplus_decreasing_blockchain) << '\n';
}

void write_nash_csv(const econ::NashResult& result, std::ostream& out) {
  out << "operator,t,iterations,converged,corner\n";
  for (std::size_t i = 0; i < result.t.size(); ++i) {
    out << i << ',' << format_number(result.t[i]) << ',' << result.iterations << ','
        << (result.converged ? "true" : "false") << ',' << (result.corner ? "true" : "false") << '\n';
  }
}

void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + (dir / name).string() + " for writing");
  f << content;
  if (!f) throw IoError("write failed for " + (dir / name).string());
}

}  // namespace roamchain
