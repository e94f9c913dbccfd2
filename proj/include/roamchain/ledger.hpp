#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "roamchain/bytes.hpp"
#include "roamchain/random.hpp"

namespace roamchain {

/// Ledger identity. Derived from a secret key by KeyRing; opaque elsewhere.
struct Address {
  std::string value;

  auto operator<=>(const Address&) const = default;
  bool empty() const { return value.empty(); }
};

enum class TxKind : std::uint8_t {
  IdentityRegistration = 1,
  MnocIssue = 2,
  PermissionGrant = 3,
  CcUpdate = 4,
  TermsAcceptance = 5,
  Charge = 6,
  Transfer = 7,
};

std::string_view to_string(TxKind kind);
bool is_monetary(TxKind kind);

struct Transaction {
  Digest tx_id;
  TxKind kind = TxKind::IdentityRegistration;
  Bytes payload;
  Address signer;
  Digest signature;
  /// Minor units; fiat (1e-4) for Charge, crypto (1e-8) for Transfer, 0 otherwise.
  std::uint64_t amount = 0;
  std::uint64_t timestamp = 0;

  bool operator==(const Transaction&) const = default;
};

/// Digest over every field except tx_id.
Digest tx_digest(const Transaction& tx);

void encode(Writer& w, const Transaction& tx);
Transaction decode_transaction(Reader& r);

/// Simulated signing: a keyed digest over (secret, payload, signer). The ring
/// holds every participant's secret, standing in for key infrastructure.
class KeyRing {
 public:
  explicit KeyRing(std::uint64_t seed = 0) : seed_(seed) {}

  /// Deterministically derives a key for `label` and returns its address.
  Address create(std::string_view label);

  bool contains(const Address& address) const { return secrets_.contains(address); }
  Digest sign(const Address& signer, ByteView payload) const;
  bool verify(const Transaction& tx) const;

  /// Builds a signed transaction with tx_id filled in.
  Transaction make_transaction(TxKind kind, Bytes payload, const Address& signer,
                               std::uint64_t amount, std::uint64_t timestamp) const;

  bool operator==(const KeyRing&) const = default;

 private:
  std::uint64_t seed_;
  std::map<Address, Bytes> secrets_;
};

/// 256-bit unsigned big-endian threshold for proof of work.
struct Target {
  std::array<std::uint8_t, 32> bytes{};

  static Target max();
  static Target one();
  /// 2^(256 - bits); bits = 0 saturates to max().
  static Target leading_zero_bits(unsigned bits);

  bool is_zero() const;
  auto operator<=>(const Target&) const = default;
};

inline bool below_target(const Digest& d, const Target& t) { return d.bytes < t.bytes; }

enum class ConsensusMode : std::uint8_t { PoW, PoS };

struct ConsensusConfig {
  ConsensusMode mode = ConsensusMode::PoW;
  Target pow_target = Target::leading_zero_bits(8);
  std::uint64_t pow_nonce_bound = 1'000'000;
  std::uint64_t pos_seed = 0;
};

struct Block {
  std::uint64_t index = 0;
  Digest prev_hash;
  Digest tx_root;
  std::uint64_t nonce = 0;
  Address creator;
  std::uint64_t timestamp = 0;
  std::vector<Transaction> transactions;
  Digest block_hash;

  bool operator==(const Block&) const = default;
};

/// Binary Merkle root over recomputed transaction digests (odd levels
/// duplicate the last node). The empty list hashes to sha256("").
Digest compute_tx_root(std::span<const Transaction> txs);
/// digest(index, prev_hash, tx_root, nonce, creator, timestamp)
Digest compute_block_hash(const Block& header);

Bytes serialize_block(const Block& block);
Block deserialize_block(ByteView data);

Block make_genesis();

class CoinAgeLedger;

class Chain {
 public:
  Chain() : blocks_{make_genesis()} {}

  /// Wraps blocks without validation; use validate_chain to check them.
  static Chain from_blocks(std::vector<Block> blocks);

  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& tip() const { return blocks_.back(); }
  std::size_t size() const { return blocks_.size(); }

  bool operator==(const Chain&) const = default;

 private:
  friend void append_block(Chain&, Block, const ConsensusConfig&, CoinAgeLedger*);
  std::vector<Block> blocks_;
};

enum class LedgerErrc {
  Exhausted,
  NoStake,
  BadLink,
  BadProof,
  BadRoot,
  BadTarget,
};

std::string_view to_string(LedgerErrc code);

class LedgerError : public std::runtime_error {
 public:
  LedgerError(LedgerErrc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}
  LedgerErrc code() const { return code_; }

 private:
  LedgerErrc code_;
};

/// Scans nonce = 0, 1, ... bound-1 and returns the first whose block hash is
/// below target. Throws Exhausted if none is.
std::uint64_t mine_pow(const Block& header, const Target& target, std::uint64_t bound);

struct Holding {
  std::uint64_t amount = 0;
  std::uint64_t created_at = 0;
  bool operator==(const Holding&) const = default;
};

class CoinAgeLedger {
 public:
  void add(const Address& who, std::uint64_t amount, std::uint64_t created_at);
  /// sum of amount * (now - created_at); holdings created after `now` count as 0.
  std::uint64_t coin_age(const Address& who, std::uint64_t now) const;
  /// Re-timestamps every holding of `who` to `now`.
  void consume(const Address& who, std::uint64_t now);

  const std::map<Address, std::vector<Holding>>& holdings() const { return holdings_; }
  bool operator==(const CoinAgeLedger&) const = default;

 private:
  std::map<Address, std::vector<Holding>> holdings_;
};

/// Samples an identity with probability proportional to coin age without
/// consuming it. Throws NoStake when every age is zero.
Address draw_pos(const CoinAgeLedger& ages, std::uint64_t now, Rng& rng);
/// draw_pos followed by consuming the winner's coin age.
Address select_pos(CoinAgeLedger& ages, std::uint64_t now, Rng& rng);

/// Deterministic per-height generator used for PoS leader election.
Rng pos_rng(std::uint64_t seed, std::uint64_t height);
/// The identity entitled to create the block at `height`.
Address pos_leader(const CoinAgeLedger& ages, std::uint64_t now, std::uint64_t seed,
                   std::uint64_t height);

/// Fills index, prev_hash and tx_root for a successor of the chain tip.
Block make_block(const Chain& chain, const Address& creator, std::uint64_t timestamp,
                 std::vector<Transaction> txs);
/// Mines (PoW) or simply hashes (PoS) the block, filling nonce and block_hash.
void seal_block(Block& block, const ConsensusConfig& cfg);

/// Appends after checking linkage, tx_root and the consensus proof. For PoS the
/// stake ledger is required and the winner's age is consumed on success.
void append_block(Chain& chain, Block block, const ConsensusConfig& cfg,
                  CoinAgeLedger* stakes = nullptr);

struct BlockFault {
  std::size_t index = 0;
  std::string reason;
  bool operator==(const BlockFault&) const = default;
};

struct ValidationReport {
  std::vector<BlockFault> faults;

  bool ok() const { return faults.empty(); }
  std::optional<std::size_t> first_invalid() const {
    if (faults.empty()) return std::nullopt;
    return faults.front().index;
  }
};

/// Checks every block's tx ids, tx_root, block hash and link to its
/// predecessor. All faults are reported in index order.
ValidationReport validate_chain(const Chain& chain);
/// As above, and additionally checks the PoW target when cfg.mode is PoW.
ValidationReport validate_chain(const Chain& chain, const ConsensusConfig& cfg);

/// One hex-encoded canonical block per line.
void export_chain(const Chain& chain, std::ostream& out);
Chain import_chain(std::istream& in);

}  // namespace roamchain
