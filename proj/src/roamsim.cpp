#include "roamchain/roamsim.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace roamchain {

std::string_view to_string(SessionState state) {
  switch (state) {
    case SessionState::Requested: return "Requested";
    case SessionState::TermsOffered: return "TermsOffered";
    case SessionState::Accepted: return "Accepted";
    case SessionState::Rejected: return "Rejected";
    case SessionState::Active: return "Active";
    case SessionState::Settled: return "Settled";
  }
  return "Unknown";
}

std::string_view to_string(SettlementMode mode) {
  return mode == SettlementMode::National ? "National" : "International";
}

std::uint64_t agreement_count(std::uint64_t n, AgreementModel model) {
  if (model == AgreementModel::PeerToPeer) return n * (n == 0 ? 0 : n - 1) / 2;
  return n;
}

LedgerAudit audit_chain(const Chain& chain) {
  LedgerAudit audit;
  std::set<Digest> granted;
  auto record = [&](auto& debits, auto& credits, auto& net, const auto& pay, std::uint64_t amount) {
    using Amount = std::remove_reference_t<decltype(debits)>;
    auto minor = static_cast<std::int64_t>(amount);
    debits += Amount::from_minor(minor);
    credits += Amount::from_minor(minor);
    net[pay.payer] -= minor;
    net[pay.payee] += minor;
    if (pay.mnoc_id && !granted.contains(*pay.mnoc_id)) ++audit.payments_without_active_mnoc;
  };
  for (const auto& block : chain.blocks()) {
    for (const auto& tx : block.transactions) {
      if (tx.kind == TxKind::PermissionGrant) {
        granted.insert(std::get<GrantPermissionAction>(decode_action(tx.kind, tx.payload)).mnoc_id);
      } else if (tx.kind == TxKind::Charge) {
        auto pay = std::get<ChargeAction>(decode_action(tx.kind, tx.payload));
        record(audit.fiat_debits, audit.fiat_credits, audit.fiat_net, pay, tx.amount);
      } else if (tx.kind == TxKind::Transfer) {
        auto pay = std::get<TransferAction>(decode_action(tx.kind, tx.payload));
        record(audit.crypto_debits, audit.crypto_credits, audit.crypto_net, pay, tx.amount);
      }
    }
  }
  return audit;
}

namespace {

std::string make_iccid(std::size_t op, std::size_t serial) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "8901%02zu%013zu", op % 100, serial);
  return buf;
}

}  // namespace

std::string Simulation::charging_query(const Address& user) { return "charging/" + user.value; }
std::string Simulation::qos_query(const Address& user) { return "qos/" + user.value; }

Simulation::Simulation(ScenarioConfig config)
    : config_(std::move(config)), keys_(config_.seed), rng_(splitmix64(config_.seed)) {
  validate_config(config_);
  for (std::size_t i = 0; i < config_.operators.size(); ++i) {
    const auto& oc = config_.operators[i];
    OperatorAgent op;
    op.code = oc.name;
    op.address = keys_.create("operator/" + std::to_string(i) + "/" + oc.name);
    op.country = oc.country;
    op.p = oc.p;
    op.c = oc.c;
    op.t = oc.t;
    op.rate = oc.rate;
    op.crypto_balance = oc.initial_crypto;
    op.store.owner = op.address;
    if (oc.stake > 0) stakes_.add(op.address, oc.stake, 0);
    initial_crypto_.push_back(oc.initial_crypto);
    operators_.push_back(std::move(op));
  }
  for (std::size_t i = 0; i < config_.operators.size(); ++i) {
    const auto& oc = config_.operators[i];
    const auto& country = config_.countries[oc.country];
    for (std::uint32_t k = 0; k < oc.users; ++k) {
      UserAgent u;
      u.iccid = make_iccid(i, k + 1);
      u.address = keys_.create("user/" + u.iccid);
      u.home = i;
      u.theta = rng_.exponential(country.lambda);
      u.wallet = config_.initial_wallet;
      u.subscribed = u.theta >= country.theta_bar;
      bool wants_to_roam = rng_.bernoulli(config_.roam_fraction);
      u.roamer = u.subscribed && wants_to_roam && config_.operators.size() > 1;
      users_.push_back(std::move(u));
    }
  }
  world_.policy = genesis_policy();
}

RegistrarPolicy Simulation::genesis_policy() const {
  RegistrarPolicy policy;
  policy.allowlist_enabled = config_.allowlist_policy;
  for (std::size_t i = 0; i < operators_.size(); ++i) {
    if (config_.operators[i].participant) policy.allowlist.insert(operators_[i].address);
  }
  return policy;
}

void Simulation::submit(const ContractAction& action, const Address& signer, std::uint64_t amount) {
  auto tx = keys_.make_transaction(kind_of(action), encode_action(action), signer, amount, tick_);
  apply_action(world_, tx, keys_);
  pending_.push_back(std::move(tx));
}

Address Simulation::block_creator() {
  if (config_.consensus.mode == ConsensusMode::PoS) {
    return pos_leader(stakes_, tick_, config_.consensus.pos_seed, chain_.size());
  }
  return operators_[chain_.size() % operators_.size()].address;
}

void Simulation::end_tick() {
  if (!pending_.empty()) {
    auto block = make_block(chain_, block_creator(), tick_, std::move(pending_));
    seal_block(block, config_.consensus);
    append_block(chain_, std::move(block), config_.consensus, &stakes_);
    pending_.clear();
  }
  ++tick_;
}

void Simulation::setup() {
  if (setup_done_) return;
  setup_done_ = true;

  for (auto& op : operators_) {
    try {
      submit(RegisterIdentityAction{op.code, op.address, Role::Operator}, op.address);
      op.registered = true;
    } catch (const ContractError& e) {
      if (e.code() != ContractErrc::PolicyDenied) throw;
    }
  }
  end_tick();

  for (auto& u : users_) {
    auto& home = operators_[u.home];
    if (!u.subscribed || !home.registered) {
      u.subscribed = false;
      u.roamer = false;
      continue;
    }
    const Fiat fee = convert_price(home.p, home.rate);
    if (u.wallet < fee) {
      u.subscribed = false;
      u.roamer = false;
      continue;
    }
    submit(RegisterIdentityAction{u.iccid, u.address, Role::User}, u.address);
    submit(ChargeAction{u.address, home.address, std::nullopt, false}, u.address,
           static_cast<std::uint64_t>(fee.minor()));
    u.wallet -= fee;
    u.spent += fee;
    home.fiat_balance += fee;
    home.domestic_revenue += fee;

    ChargingRecord rec{u.address, "subscription", 0, home.p.to_double(), "crypto"};
    put_record(home.store, charging_query(u.address), encode_record(rec));
    std::string qos = "qci=9;apn=internet";
    put_record(home.store, qos_query(u.address), Bytes(qos.begin(), qos.end()));
  }
  end_tick();
}

RoamingSession Simulation::attempt_roam(std::size_t user, std::size_t vno) {
  auto& u = users_.at(user);
  auto& visited = operators_.at(vno);
  auto& home = operators_.at(u.home);
  if (!u.subscribed) throw SimulationError(SimErrc::NotRoamable, "user " + u.iccid + " is not a subscriber");
  if (vno == u.home) throw SimulationError(SimErrc::NotRoamable, "VNO is the user's home operator");

  RoamingSession s;
  s.user = user;
  s.hno = u.home;
  s.vno = vno;
  s.started_at = tick_;

  const auto* entry = world_.lookup(visited.address);
  if (entry == nullptr || entry->role != Role::Operator) {
    throw SimulationError(SimErrc::NotRoamable, "VNO " + visited.code + " is not a registered operator");
  }

  std::vector<QueryPointer> pointers{make_pointer(home.store, charging_query(u.address)),
                                     make_pointer(home.store, qos_query(u.address))};
  s.mnoc_id = mnoc_contract_id(home.address, visited.address, u.address, pointers, tick_);
  submit(IssueMnocAction{home.address, visited.address, u.address, pointers}, home.address);

  // The user learns of the proposal by polling their CC.
  auto rels = poll_cc(world_, u.address);
  if (std::none_of(rels.begin(), rels.end(), [&](const auto& r) { return r.mnoc_id == s.mnoc_id; })) {
    throw SimulationError(SimErrc::BadSession, "issued MNOC missing from the user's CC");
  }

  s.offered_price = convert_price(visited.c, visited.rate);
  s.state = SessionState::TermsOffered;

  if (s.offered_price.to_double() > u.theta) {
    submit(UpdateCcAction{u.address, s.mnoc_id, RelationshipStatus::Rejected}, u.address);
    s.state = SessionState::Rejected;
    sessions_.push_back(s);
    return s;
  }

  submit(AcceptTermsAction{s.mnoc_id}, u.address);
  s.state = SessionState::Accepted;
  submit(GrantPermissionAction{s.mnoc_id, visited.address, charging_query(u.address)}, home.address);

  auto response = serve_request(home.store, world_, AccessRequest{visited.address, pointers.front()});
  if (std::holds_alternative<Granted>(response)) {
    s.state = SessionState::Active;
    s.volume = config_.max_volume == 0 ? 0 : 1 + rng_.below(config_.max_volume);
  } else {
    ++access_denied_;
  }
  sessions_.push_back(s);
  return s;
}

SettlementMode Simulation::settlement_mode(const RoamingSession& s) const {
  return operators_[s.hno].country == operators_[s.vno].country ? SettlementMode::National
                                                                 : SettlementMode::International;
}

void Simulation::settle_one(RoamingSession& s, SettlementMode mode) {
  auto& u = users_[s.user];
  auto& home = operators_[s.hno];
  auto& visited = operators_[s.vno];
  const auto volume = static_cast<std::int64_t>(s.volume);
  if (mode == SettlementMode::International) {
    const Fiat amount = s.offered_price * volume;
    if (u.wallet < amount) {
      ++insufficient_funds_;
      throw SimulationError(SimErrc::InsufficientFunds, "user " + u.iccid + " cannot pay " + amount.str());
    }
    submit(ChargeAction{u.address, visited.address, s.mnoc_id, true}, u.address,
           static_cast<std::uint64_t>(amount.minor()));
    u.wallet -= amount;
    u.spent += amount;
    visited.fiat_balance += amount;
    visited.roaming_revenue += amount;
  } else {
    const Crypto amount = visited.c * volume;
    if (home.crypto_balance < amount) {
      ++insufficient_funds_;
      throw SimulationError(SimErrc::InsufficientFunds, "HNO " + home.code + " cannot transfer " + amount.str());
    }
    submit(TransferAction{home.address, visited.address, s.mnoc_id, true}, home.address,
           static_cast<std::uint64_t>(amount.minor()));
    home.crypto_balance -= amount;
    home.transit_out += amount;
    visited.crypto_balance += amount;
    visited.transit_in += amount;
  }
  s.state = SessionState::Settled;
}

void Simulation::settle(std::span<const std::size_t> which, std::optional<SettlementMode> mode) {
  std::optional<SimulationError> first_error;
  for (auto idx : which) {
    auto& s = sessions_.at(idx);
    if (s.state != SessionState::Active) {
      throw SimulationError(SimErrc::BadSession, "only Active sessions can be settled");
    }
    try {
      settle_one(s, mode.value_or(settlement_mode(s)));
    } catch (const SimulationError& e) {
      if (!first_error) first_error = e;
    }
  }
  if (first_error) throw *first_error;
}

void Simulation::run() {
  setup();
  const std::uint64_t first = tick_;
  std::map<std::uint64_t, std::vector<std::pair<std::size_t, std::size_t>>> schedule;
  std::vector<std::size_t> roamer_seq(operators_.size(), 0);
  for (std::size_t i = 0; i < users_.size(); ++i) {
    const auto& u = users_[i];
    if (!u.roamer) continue;
    const auto& prefs = config_.operators[u.home].roam_preference;
    std::size_t vno = 0;
    if (!prefs.empty()) {
      vno = prefs[roamer_seq[u.home]++ % prefs.size()];
    } else {
      vno = u.home == 0 ? 1 : 0;
    }
    if (!operators_[vno].registered) continue;
    schedule[first + rng_.below(config_.ticks)].emplace_back(i, vno);
  }

  auto settle_due = [this](bool everything) {
    std::vector<std::size_t> due;
    for (std::size_t k = 0; k < sessions_.size(); ++k) {
      const auto& s = sessions_[k];
      if (s.state == SessionState::Active && (everything || s.started_at < tick_)) due.push_back(k);
    }
    try {
      settle(due);
    } catch (const SimulationError& e) {
      if (e.code() != SimErrc::InsufficientFunds) throw;
    }
  };

  for (std::uint64_t step = 0; step < config_.ticks; ++step) {
    settle_due(false);
    for (auto [user, vno] : schedule[tick_]) attempt_roam(user, vno);
    end_tick();
  }
  settle_due(true);
  end_tick();
}

MetricsReport Simulation::metrics() const {
  MetricsReport m;
  for (std::size_t i = 0; i < operators_.size(); ++i) {
    const auto& op = operators_[i];
    OperatorMetrics om;
    om.code = op.code;
    om.domestic_revenue = op.domestic_revenue;
    om.roaming_revenue = op.roaming_revenue;
    om.transit_in = op.transit_in;
    om.transit_out = op.transit_out;
    om.crypto_balance_delta = op.crypto_balance - initial_crypto_[i];
    m.operators.push_back(std::move(om));
    m.fiat_credits += op.fiat_balance;
    m.crypto_credits += op.transit_in;
    m.crypto_debits += op.transit_out;
  }
  for (const auto& u : users_) {
    if (!u.subscribed) continue;
    ++m.operators[u.home].subscribers;
    const auto& home = operators_[u.home];
    m.consumer_surplus += u.theta - convert_price(home.p, home.rate).to_double();
    m.fiat_debits += u.spent;
  }
  for (const auto& s : sessions_) {
    ++m.sessions[s.state];
    if (s.state == SessionState::Active || s.state == SessionState::Settled) {
      ++m.operators[s.vno].visitors_served;
      double d = users_[s.user].theta - s.offered_price.to_double();
      m.consumer_surplus += config_.kappa * d * d;
    }
  }
  m.insufficient_funds = insufficient_funds_;
  m.access_denied = access_denied_;
  m.agreements_peer_to_peer = agreement_count(operators_.size(), AgreementModel::PeerToPeer);
  m.agreements_blockchain = agreement_count(operators_.size(), AgreementModel::Blockchain);
  m.mnocs_issued = world_.mnocs.size();
  m.blocks = chain_.size();
  for (const auto& b : chain_.blocks()) m.transactions += b.transactions.size();
  return m;
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  Simulation sim(config);
  sim.run();
  return {sim.chain(), sim.world(), sim.metrics(), sim.keys(), sim.genesis_policy()};
}

}  // namespace roamchain
