#include "roamchain/ledger.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

namespace roamchain {

std::string_view to_string(TxKind kind) {
  switch (kind) {
    case TxKind::IdentityRegistration: return "IdentityRegistration";
    case TxKind::MnocIssue: return "MnocIssue";
    case TxKind::PermissionGrant: return "PermissionGrant";
    case TxKind::CcUpdate: return "CcUpdate";
    case TxKind::TermsAcceptance: return "TermsAcceptance";
    case TxKind::Charge: return "Charge";
    case TxKind::Transfer: return "Transfer";
  }
  return "Unknown";
}

bool is_monetary(TxKind kind) { return kind == TxKind::Charge || kind == TxKind::Transfer; }

std::string_view to_string(LedgerErrc code) {
  switch (code) {
    case LedgerErrc::Exhausted: return "Exhausted";
    case LedgerErrc::NoStake: return "NoStake";
    case LedgerErrc::BadLink: return "BadLink";
    case LedgerErrc::BadProof: return "BadProof";
    case LedgerErrc::BadRoot: return "BadRoot";
    case LedgerErrc::BadTarget: return "BadTarget";
  }
  return "Unknown";
}

namespace {

void encode_unsigned(Writer& w, const Transaction& tx) {
  w.u8(static_cast<std::uint8_t>(tx.kind))
      .bytes(tx.payload)
      .str(tx.signer.value)
      .digest(tx.signature)
      .u64(tx.amount)
      .u64(tx.timestamp);
}

TxKind decode_kind(std::uint8_t raw) {
  if (raw < 1 || raw > 7) throw DecodeError("unknown transaction kind");
  return static_cast<TxKind>(raw);
}

void encode_header(Writer& w, const Block& b) {
  w.u64(b.index).digest(b.prev_hash).digest(b.tx_root).u64(b.nonce).str(b.creator.value).u64(
      b.timestamp);
}

Digest hash_pair(const Digest& a, const Digest& b) {
  std::array<std::uint8_t, 64> buf{};
  std::copy(a.bytes.begin(), a.bytes.end(), buf.begin());
  std::copy(b.bytes.begin(), b.bytes.end(), buf.begin() + 32);
  return sha256(ByteView{buf});
}

}  // namespace

Digest tx_digest(const Transaction& tx) {
  Writer w;
  encode_unsigned(w, tx);
  return sha256(w.data());
}

void encode(Writer& w, const Transaction& tx) {
  w.digest(tx.tx_id);
  encode_unsigned(w, tx);
}

Transaction decode_transaction(Reader& r) {
  Transaction tx;
  tx.tx_id = r.digest();
  tx.kind = decode_kind(r.u8());
  tx.payload = r.bytes();
  tx.signer.value = r.str();
  tx.signature = r.digest();
  tx.amount = r.u64();
  tx.timestamp = r.u64();
  return tx;
}

Address KeyRing::create(std::string_view label) {
  Writer w;
  w.str("roamchain-key").u64(seed_).str(label);
  auto secret_digest = sha256(w.data());
  Bytes secret(secret_digest.bytes.begin(), secret_digest.bytes.end());
  auto pub = sha256(ByteView{secret});
  Address address{"0x" + to_hex(ByteView{pub.bytes}.first(20))};
  secrets_[address] = std::move(secret);
  return address;
}

Digest KeyRing::sign(const Address& signer, ByteView payload) const {
  auto it = secrets_.find(signer);
  if (it == secrets_.end()) throw std::invalid_argument("no key for " + signer.value);
  Writer w;
  w.bytes(it->second).bytes(payload).str(signer.value);
  return sha256(w.data());
}

bool KeyRing::verify(const Transaction& tx) const {
  if (!contains(tx.signer)) return false;
  return sign(tx.signer, tx.payload) == tx.signature;
}

Transaction KeyRing::make_transaction(TxKind kind, Bytes payload, const Address& signer,
                                      std::uint64_t amount, std::uint64_t timestamp) const {
  Transaction tx;
  tx.kind = kind;
  tx.payload = std::move(payload);
  tx.signer = signer;
  tx.signature = sign(signer, tx.payload);
  tx.amount = amount;
  tx.timestamp = timestamp;
  tx.tx_id = tx_digest(tx);
  return tx;
}

Target Target::max() {
  Target t;
  t.bytes.fill(0xff);
  return t;
}

Target Target::one() {
  Target t;
  t.bytes.back() = 1;
  return t;
}

Target Target::leading_zero_bits(unsigned bits) {
  if (bits == 0) return max();
  if (bits > 256) throw std::invalid_argument("leading zero bits must be <= 256");
  Target t;
  if (bits == 256) return t;
  unsigned bit = 256 - bits;  // set bit position, counted from the least significant end
  t.bytes[31 - bit / 8] = static_cast<std::uint8_t>(1u << (bit % 8));
  return t;
}

bool Target::is_zero() const {
  for (auto b : bytes)
    if (b != 0) return false;
  return true;
}

Digest compute_tx_root(std::span<const Transaction> txs) {
  if (txs.empty()) return sha256(ByteView{});
  std::vector<Digest> level;
  level.reserve(txs.size());
  for (const auto& tx : txs) level.push_back(tx_digest(tx));
  while (level.size() > 1) {
    if (level.size() % 2 == 1) level.push_back(level.back());
    std::vector<Digest> next;
    next.reserve(level.size() / 2);
    for (std::size_t i = 0; i < level.size(); i += 2) next.push_back(hash_pair(level[i], level[i + 1]));
    level = std::move(next);
  }
  return level.front();
}

Digest compute_block_hash(const Block& header) {
  Writer w;
  encode_header(w, header);
  return sha256(w.data());
}

Bytes serialize_block(const Block& block) {
  Writer w;
  encode_header(w, block);
  w.digest(block.block_hash);
  w.u32(static_cast<std::uint32_t>(block.transactions.size()));
  for (const auto& tx : block.transactions) encode(w, tx);
  return w.take();
}

Block deserialize_block(ByteView data) {
  Reader r(data);
  Block b;
  b.index = r.u64();
  b.prev_hash = r.digest();
  b.tx_root = r.digest();
  b.nonce = r.u64();
  b.creator.value = r.str();
  b.timestamp = r.u64();
  b.block_hash = r.digest();
  auto count = r.u32();
  // Each encoded transaction is well over 64 bytes; guards absurd counts.
  if (count > data.size() / 64) throw DecodeError("transaction count exceeds input size");
  b.transactions.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) b.transactions.push_back(decode_transaction(r));
  r.expect_end();
  return b;
}

Block make_genesis() {
  Block g;
  g.tx_root = compute_tx_root({});
  g.block_hash = compute_block_hash(g);
  return g;
}

Chain Chain::from_blocks(std::vector<Block> blocks) {
  Chain c;
  c.blocks_ = std::move(blocks);
  return c;
}

std::uint64_t mine_pow(const Block& header, const Target& target, std::uint64_t bound) {
  if (target.is_zero()) throw LedgerError(LedgerErrc::BadTarget, "target must be > 0");
  Block candidate = header;
  for (std::uint64_t nonce = 0; nonce < bound; ++nonce) {
    candidate.nonce = nonce;
    if (below_target(compute_block_hash(candidate), target)) return nonce;
  }
  throw LedgerError(LedgerErrc::Exhausted, "no nonce below " + std::to_string(bound));
}

void CoinAgeLedger::add(const Address& who, std::uint64_t amount, std::uint64_t created_at) {
  holdings_[who].push_back({amount, created_at});
}

std::uint64_t CoinAgeLedger::coin_age(const Address& who, std::uint64_t now) const {
  auto it = holdings_.find(who);
  if (it == holdings_.end()) return 0;
  std::uint64_t age = 0;
  for (const auto& h : it->second) {
    if (h.created_at < now) age += h.amount * (now - h.created_at);
  }
  return age;
}

void CoinAgeLedger::consume(const Address& who, std::uint64_t now) {
  auto it = holdings_.find(who);
  if (it == holdings_.end()) return;
  for (auto& h : it->second) h.created_at = now;
}

Address draw_pos(const CoinAgeLedger& ages, std::uint64_t now, Rng& rng) {
  std::uint64_t total = 0;
  for (const auto& [who, _] : ages.holdings()) total += ages.coin_age(who, now);
  if (total == 0) throw LedgerError(LedgerErrc::NoStake, "all coin ages are zero");
  auto ticket = rng.below(total);
  for (const auto& [who, _] : ages.holdings()) {
    auto age = ages.coin_age(who, now);
    if (ticket < age) return who;
    ticket -= age;
  }
  throw std::logic_error("coin age draw fell off the end");
}

Address select_pos(CoinAgeLedger& ages, std::uint64_t now, Rng& rng) {
  auto winner = draw_pos(ages, now, rng);
  ages.consume(winner, now);
  return winner;
}

Rng pos_rng(std::uint64_t seed, std::uint64_t height) {
  return Rng(splitmix64(seed ^ splitmix64(height)));
}

Address pos_leader(const CoinAgeLedger& ages, std::uint64_t now, std::uint64_t seed,
                   std::uint64_t height) {
  auto rng = pos_rng(seed, height);
  return draw_pos(ages, now, rng);
}

Block make_block(const Chain& chain, const Address& creator, std::uint64_t timestamp,
                 std::vector<Transaction> txs) {
  Block b;
  b.index = chain.size();
  b.prev_hash = chain.tip().block_hash;
  b.creator = creator;
  b.timestamp = timestamp;
  b.transactions = std::move(txs);
  b.tx_root = compute_tx_root(b.transactions);
  return b;
}

void seal_block(Block& block, const ConsensusConfig& cfg) {
  if (cfg.mode == ConsensusMode::PoW) {
    block.nonce = mine_pow(block, cfg.pow_target, cfg.pow_nonce_bound);
  } else {
    block.nonce = 0;
  }
  block.block_hash = compute_block_hash(block);
}

void append_block(Chain& chain, Block block, const ConsensusConfig& cfg, CoinAgeLedger* stakes) {
  const Block& tip = chain.tip();
  if (block.prev_hash != tip.block_hash) {
    throw LedgerError(LedgerErrc::BadLink, "prev_hash does not match tip");
  }
  if (block.index != chain.size()) {
    throw LedgerError(LedgerErrc::BadLink, "index " + std::to_string(block.index) + " expected " +
                                               std::to_string(chain.size()));
  }
  if (block.timestamp <= tip.timestamp) {
    throw LedgerError(LedgerErrc::BadLink, "timestamp must advance past the tip");
  }
  for (const auto& tx : block.transactions) {
    if (tx.tx_id != tx_digest(tx)) throw LedgerError(LedgerErrc::BadRoot, "tx_id mismatch");
  }
  if (block.tx_root != compute_tx_root(block.transactions)) {
    throw LedgerError(LedgerErrc::BadRoot, "tx_root does not match transactions");
  }
  if (block.block_hash != compute_block_hash(block)) {
    throw LedgerError(LedgerErrc::BadProof, "block_hash does not match header");
  }
  if (cfg.mode == ConsensusMode::PoW) {
    if (!below_target(block.block_hash, cfg.pow_target)) {
      throw LedgerError(LedgerErrc::BadProof, "block_hash not below target");
    }
  } else {
    if (stakes == nullptr) throw LedgerError(LedgerErrc::NoStake, "PoS append needs a stake ledger");
    auto leader = pos_leader(*stakes, block.timestamp, cfg.pos_seed, block.index);
    if (leader != block.creator) {
      throw LedgerError(LedgerErrc::BadProof, "creator is not the elected PoS leader");
    }
    stakes->consume(leader, block.timestamp);
  }
  chain.blocks_.push_back(std::move(block));
}

namespace {

std::optional<std::string> check_block_contents(const Block& b) {
  for (const auto& tx : b.transactions) {
    if (tx.tx_id != tx_digest(tx)) return "tx_id mismatch";
    if (!is_monetary(tx.kind) && tx.amount != 0) return "non-monetary transaction carries an amount";
  }
  if (b.tx_root != compute_tx_root(b.transactions)) return "tx_root mismatch";
  if (b.block_hash != compute_block_hash(b)) return "block_hash mismatch";
  return std::nullopt;
}

}  // namespace

ValidationReport validate_chain(const Chain& chain) {
  ValidationReport report;
  const auto& blocks = chain.blocks();
  if (blocks.empty()) {
    report.faults.push_back({0, "missing genesis block"});
    return report;
  }
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const Block& b = blocks[k];
    std::optional<std::string> fault;
    if (k == 0) {
      if (b.index != 0 || !b.prev_hash.is_zero() || !b.transactions.empty() || b.nonce != 0 ||
          b.timestamp != 0) {
        fault = "malformed genesis";
      }
    } else {
      const Block& prev = blocks[k - 1];
      if (b.index != k) fault = "index out of sequence";
      else if (b.prev_hash != prev.block_hash) fault = "broken link to previous block";
      else if (b.timestamp <= prev.timestamp) fault = "timestamp does not advance";
    }
    if (!fault) fault = check_block_contents(b);
    if (fault) report.faults.push_back({k, *fault});
  }
  return report;
}

ValidationReport validate_chain(const Chain& chain, const ConsensusConfig& cfg) {
  auto report = validate_chain(chain);
  if (cfg.mode != ConsensusMode::PoW) return report;
  const auto& blocks = chain.blocks();
  for (std::size_t k = 1; k < blocks.size(); ++k) {
    if (!below_target(blocks[k].block_hash, cfg.pow_target)) {
      bool already = false;
      for (const auto& f : report.faults) already = already || f.index == k;
      if (!already) report.faults.push_back({k, "block_hash not below target"});
    }
  }
  std::sort(report.faults.begin(), report.faults.end(),
            [](const auto& a, const auto& b) { return a.index < b.index; });
  return report;
}

void export_chain(const Chain& chain, std::ostream& out) {
  for (const auto& b : chain.blocks()) out << to_hex(serialize_block(b)) << '\n';
}

Chain import_chain(std::istream& in) {
  std::vector<Block> blocks;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    blocks.push_back(deserialize_block(from_hex(line)));
  }
  return Chain::from_blocks(std::move(blocks));
}

}  // namespace roamchain
