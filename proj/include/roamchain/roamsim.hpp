#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "roamchain/contracts.hpp"
#include "roamchain/gatekeeper.hpp"
#include "roamchain/ledger.hpp"
#include "roamchain/money.hpp"
#include "roamchain/scenario_config.hpp"

namespace roamchain {

struct UserAgent {
  std::string iccid;
  Address address;
  std::size_t home = 0;  // operator index
  double theta = 0.0;    // willingness-to-pay, fiat per month
  Fiat wallet;
  Fiat spent;
  bool subscribed = false;
  bool roamer = false;
};

struct OperatorAgent {
  std::string code;
  Address address;
  std::size_t country = 0;
  Crypto p, c, t;
  ConversionRate rate{ConversionRate::Value::from_minor(ConversionRate::Value::kScale)};
  Crypto crypto_balance;
  Fiat fiat_balance;
  RecordStore store;
  bool registered = false;
  // Running totals, kept apart from the balances for auditing.
  Fiat domestic_revenue;
  Fiat roaming_revenue;
  Crypto transit_in;
  Crypto transit_out;
};

enum class SessionState : std::uint8_t { Requested, TermsOffered, Accepted, Rejected, Active, Settled };
enum class SettlementMode : std::uint8_t { National, International };

std::string_view to_string(SessionState state);
std::string_view to_string(SettlementMode mode);

struct RoamingSession {
  std::size_t user = 0;
  std::size_t hno = 0;
  std::size_t vno = 0;
  Digest mnoc_id;
  SessionState state = SessionState::Requested;
  Fiat offered_price;  // per volume unit
  std::uint64_t volume = 0;
  std::uint64_t started_at = 0;
};

enum class SimErrc { InsufficientFunds, NotRoamable, BadSession };

class SimulationError : public std::runtime_error {
 public:
  SimulationError(SimErrc code, const std::string& detail) : std::runtime_error(detail), code_(code) {}
  SimErrc code() const { return code_; }

 private:
  SimErrc code_;
};

enum class AgreementModel { PeerToPeer, Blockchain };

/// Bilateral agreements need n(n-1)/2 contracts; the shared registrar needs
/// one entry per operator.
std::uint64_t agreement_count(std::uint64_t n, AgreementModel model);

struct OperatorMetrics {
  std::string code;
  Fiat domestic_revenue;
  Fiat roaming_revenue;
  Crypto transit_in;   // inter-operator settlements received
  Crypto transit_out;  // inter-operator settlements paid
  Crypto crypto_balance_delta;
  std::uint32_t subscribers = 0;
  std::uint32_t visitors_served = 0;
};

struct MetricsReport {
  std::vector<OperatorMetrics> operators;
  double consumer_surplus = 0.0;
  std::map<SessionState, std::uint32_t> sessions;
  std::uint32_t insufficient_funds = 0;
  std::uint32_t access_denied = 0;
  std::uint64_t agreements_peer_to_peer = 0;
  std::uint64_t agreements_blockchain = 0;
  std::uint64_t mnocs_issued = 0;
  std::uint64_t blocks = 0;
  std::uint64_t transactions = 0;
  // Agent-side bookkeeping, audited against the chain.
  Fiat fiat_debits, fiat_credits;
  Crypto crypto_debits, crypto_credits;
};

/// Sums of Charge (fiat) and Transfer (crypto) movements recovered from the
/// chain alone, with the net flow per address.
struct LedgerAudit {
  Fiat fiat_debits, fiat_credits;
  Crypto crypto_debits, crypto_credits;
  std::map<Address, std::int64_t> fiat_net;    // minor units
  std::map<Address, std::int64_t> crypto_net;  // minor units
  std::size_t payments_without_active_mnoc = 0;
};

LedgerAudit audit_chain(const Chain& chain);

/// Deterministic event loop over ledger, contracts and gatekeepers. Every
/// contract action is applied to the world when submitted and buffered for
/// the next block; at most one block is sealed per tick.
class Simulation {
 public:
  explicit Simulation(ScenarioConfig config);

  /// Registers operators and subscribers and bills domestic subscriptions.
  void setup();

  /// Registrar lookup, MNOC issue, terms offer and the user's decision; on
  /// acceptance the HNO grants the VNO its charging-record query and the VNO
  /// fetches it through the HNO gatekeeper.
  RoamingSession attempt_roam(std::size_t user, std::size_t vno);

  /// Settles the given Active sessions (indices into sessions()). National
  /// when HNO and VNO share a country unless `mode` overrides. A session
  /// failing the funds check stays Active; the first such error is rethrown
  /// after the rest are processed.
  void settle(std::span<const std::size_t> which, std::optional<SettlementMode> mode = std::nullopt);

  /// Seals pending transactions into a block at the current tick, then advances time.
  void end_tick();

  /// setup, one roaming attempt per roamer spread over the configured ticks,
  /// settlement one tick later, and the final report.
  void run();

  const ScenarioConfig& config() const { return config_; }
  const Chain& chain() const { return chain_; }
  const ContractWorld& world() const { return world_; }
  const KeyRing& keys() const { return keys_; }
  const std::vector<UserAgent>& users() const { return users_; }
  const std::vector<OperatorAgent>& operators() const { return operators_; }
  const std::vector<RoamingSession>& sessions() const { return sessions_; }
  std::uint64_t now() const { return tick_; }
  RegistrarPolicy genesis_policy() const;
  MetricsReport metrics() const;

  RecordStore& store_of(std::size_t op) { return operators_.at(op).store; }
  void set_user_theta(std::size_t user, double theta) { users_.at(user).theta = theta; }

  static std::string charging_query(const Address& user);
  static std::string qos_query(const Address& user);

 private:
  void submit(const ContractAction& action, const Address& signer, std::uint64_t amount = 0);
  Address block_creator();
  SettlementMode settlement_mode(const RoamingSession& s) const;
  void settle_one(RoamingSession& s, SettlementMode mode);

  ScenarioConfig config_;
  KeyRing keys_;
  Rng rng_;
  Chain chain_;
  ContractWorld world_;
  CoinAgeLedger stakes_;
  std::vector<UserAgent> users_;
  std::vector<OperatorAgent> operators_;
  std::vector<Crypto> initial_crypto_;
  std::vector<Transaction> pending_;
  std::vector<RoamingSession> sessions_;
  std::uint64_t tick_ = 1;
  std::uint32_t insufficient_funds_ = 0;
  std::uint32_t access_denied_ = 0;
  bool setup_done_ = false;
};

struct ScenarioResult {
  Chain chain;
  ContractWorld world;
  MetricsReport metrics;
  KeyRing keys;
  RegistrarPolicy policy;
};

/// Throws ConfigError for an invalid config.
ScenarioResult run_scenario(const ScenarioConfig& config);

}  // namespace roamchain
