#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "roamchain/ledger.hpp"

using namespace roamchain;

namespace {

// Independent Merkle oracle: leaves are tx digests, parents sha256(l || r),
// odd levels repeat the last node.
Digest merkle_oracle(const std::vector<Transaction>& txs) {
  if (txs.empty()) return sha256(std::string_view{});
  std::vector<Digest> level;
  for (const auto& tx : txs) level.push_back(tx_digest(tx));
  while (level.size() > 1) {
    std::vector<Digest> up;
    for (std::size_t i = 0; i < level.size(); i += 2) {
      const Digest& l = level[i];
      const Digest& r = i + 1 < level.size() ? level[i + 1] : level[i];
      Bytes buf(l.bytes.begin(), l.bytes.end());
      buf.insert(buf.end(), r.bytes.begin(), r.bytes.end());
      up.push_back(sha256(ByteView{buf}));
    }
    level = std::move(up);
  }
  return level[0];
}

struct Fixture {
  KeyRing keys{11};
  Address alice = keys.create("alice");
  Address bob = keys.create("bob");

  Transaction tx(std::uint64_t n, std::uint64_t ts) {
    Bytes payload{static_cast<std::uint8_t>(n), static_cast<std::uint8_t>(n >> 8)};
    return keys.make_transaction(TxKind::Charge, payload, n % 2 ? alice : bob, n, ts);
  }

  Chain build(std::size_t blocks, const ConsensusConfig& cfg, std::size_t per_block = 3) {
    Chain chain;
    std::uint64_t n = 0;
    for (std::size_t b = 1; b <= blocks; ++b) {
      std::vector<Transaction> txs;
      for (std::size_t k = 0; k < per_block; ++k) txs.push_back(tx(n++, b));
      Block blk = make_block(chain, alice, b, std::move(txs));
      seal_block(blk, cfg);
      append_block(chain, std::move(blk), cfg);
    }
    return chain;
  }
};

}  // namespace

TEST(TxDigest, DeterministicAndSensitive) {
  Fixture f;
  auto a = f.keys.make_transaction(TxKind::Charge, {}, f.alice, 1, 5);
  auto b = a;
  EXPECT_EQ(tx_digest(a), tx_digest(b));
  b.amount = 2;
  EXPECT_NE(tx_digest(a), tx_digest(b));
  EXPECT_EQ(a.tx_id, tx_digest(a));
}

TEST(TxDigest, NoCollisionsOverRandomCorpus) {
  Fixture f;
  Rng rng(2024);
  std::set<Digest> seen;
  for (int i = 0; i < 10'000; ++i) {
    Bytes payload(rng.below(16));
    for (auto& byte : payload) byte = static_cast<std::uint8_t>(rng.next());
    Transaction t;
    t.kind = static_cast<TxKind>(1 + rng.below(7));
    t.payload = payload;
    t.signer = rng.bernoulli(0.5) ? f.alice : f.bob;
    t.amount = rng.below(4);
    t.timestamp = rng.below(4);
    seen.insert(tx_digest(t));
  }
  // Duplicated inputs collapse, so count distinct encodings separately.
  std::set<Bytes> encodings;
  Rng again(2024);
  for (int i = 0; i < 10'000; ++i) {
    Bytes payload(again.below(16));
    for (auto& byte : payload) byte = static_cast<std::uint8_t>(again.next());
    Transaction t;
    t.kind = static_cast<TxKind>(1 + again.below(7));
    t.payload = payload;
    t.signer = again.bernoulli(0.5) ? f.alice : f.bob;
    t.amount = again.below(4);
    t.timestamp = again.below(4);
    Writer w;
    encode(w, t);
    encodings.insert(w.take());
  }
  EXPECT_EQ(seen.size(), encodings.size());
}

TEST(Transaction, EncodeDecodeRoundTrip) {
  Fixture f;
  auto t = f.keys.make_transaction(TxKind::Transfer, Bytes{9, 8, 7}, f.bob, 123456789, 77);
  Writer w;
  encode(w, t);
  Bytes buf = w.take();
  Reader r(buf);
  EXPECT_EQ(decode_transaction(r), t);
  EXPECT_TRUE(r.done());
}

TEST(KeyRing, SignaturesBindPayloadAndSigner) {
  Fixture f;
  auto t = f.keys.make_transaction(TxKind::Charge, Bytes{1}, f.alice, 0, 0);
  EXPECT_TRUE(f.keys.verify(t));
  auto forged = t;
  forged.payload = Bytes{2};
  EXPECT_FALSE(f.keys.verify(forged));
  forged = t;
  forged.signer = f.bob;
  EXPECT_FALSE(f.keys.verify(forged));
  KeyRing other(12);
  EXPECT_NE(other.create("alice"), f.alice);
}

TEST(Target, LeadingZeroBits) {
  auto t = Target::leading_zero_bits(8);
  EXPECT_EQ(t.bytes[0], 0x01);
  for (std::size_t i = 1; i < 32; ++i) EXPECT_EQ(t.bytes[i], 0);
  EXPECT_EQ(Target::leading_zero_bits(0), Target::max());
  EXPECT_TRUE(Target::leading_zero_bits(256).is_zero());
  auto t255 = Target::leading_zero_bits(255);
  EXPECT_EQ(t255.bytes[31], 0x02);
  EXPECT_LT(Target::one(), t255);
}

TEST(MerkleRoot, MatchesOracle) {
  Fixture f;
  for (std::size_t n = 0; n <= 9; ++n) {
    std::vector<Transaction> txs;
    for (std::size_t i = 0; i < n; ++i) txs.push_back(f.tx(i, 1));
    EXPECT_EQ(compute_tx_root(txs), merkle_oracle(txs)) << n << " transactions";
  }
}

TEST(MinePow, MaxTargetAcceptsNonceZero) {
  Chain chain;
  Block b = make_block(chain, Address{"m"}, 1, {});
  EXPECT_EQ(mine_pow(b, Target::max(), 1), 0u);
}

TEST(MinePow, ReturnedNonceRecheckedIndependently) {
  Chain chain;
  Block b = make_block(chain, Address{"m"}, 1, {});
  auto target = Target::leading_zero_bits(8);
  auto nonce = mine_pow(b, target, 1'000'000);
  b.nonce = nonce;
  auto h = compute_block_hash(b);
  EXPECT_EQ(h.bytes[0], 0);  // below 2^248 means the first byte is zero
  // First hit: every smaller nonce fails.
  for (std::uint64_t k = 0; k < nonce; ++k) {
    b.nonce = k;
    EXPECT_NE(compute_block_hash(b).bytes[0], 0);
  }
}

TEST(MinePow, ExhaustedOnUnreachableTarget) {
  Chain chain;
  Block b = make_block(chain, Address{"m"}, 1, {});
  try {
    mine_pow(b, Target::one(), 100);
    FAIL() << "expected Exhausted";
  } catch (const LedgerError& e) {
    EXPECT_EQ(e.code(), LedgerErrc::Exhausted);
  }
  EXPECT_THROW(mine_pow(b, Target{}, 100), LedgerError);
}

TEST(CoinAge, AccumulatesAndResets) {
  CoinAgeLedger ages;
  Address a{"a"};
  ages.add(a, 10, 2);
  ages.add(a, 5, 4);
  EXPECT_EQ(ages.coin_age(a, 6), 10u * 4 + 5u * 2);
  EXPECT_EQ(ages.coin_age(a, 3), 10u);  // second holding not yet created
  ages.consume(a, 6);
  EXPECT_EQ(ages.coin_age(a, 6), 0u);
  EXPECT_EQ(ages.coin_age(a, 7), 15u);
  EXPECT_EQ(ages.coin_age(Address{"nobody"}, 7), 0u);
}

TEST(SelectPos, SingleStakerAlwaysWins) {
  CoinAgeLedger ages;
  ages.add(Address{"solo"}, 1, 0);
  Rng rng(1);
  for (std::uint64_t t = 1; t < 20; ++t) EXPECT_EQ(select_pos(ages, t, rng), Address{"solo"});
}

TEST(SelectPos, NoStakeIsAnError) {
  CoinAgeLedger ages;
  ages.add(Address{"a"}, 5, 3);
  Rng rng(1);
  try {
    select_pos(ages, 3, rng);
    FAIL();
  } catch (const LedgerError& e) {
    EXPECT_EQ(e.code(), LedgerErrc::NoStake);
  }
}

TEST(SelectPos, ProportionalToCoinAge) {
  // Fresh ledger per draw so ages stay {3, 1}. Binomial(1e4, 0.75): sd = 43.3.
  Address a{"A"}, b{"B"};
  Rng rng(99);
  int wins = 0;
  const int n = 10'000;
  for (int i = 0; i < n; ++i) {
    CoinAgeLedger ages;
    ages.add(a, 3, 0);
    ages.add(b, 1, 0);
    auto w = select_pos(ages, 1, rng);
    if (w == a) {
      ++wins;
      EXPECT_EQ(ages.coin_age(a, 1), 0u);
      EXPECT_EQ(ages.coin_age(b, 1), 1u);
    }
  }
  const double sd = std::sqrt(n * 0.75 * 0.25);
  EXPECT_NEAR(wins, 7500, 3 * sd);
}

TEST(AppendBlock, AcceptsValidSuccessor) {
  Fixture f;
  ConsensusConfig cfg;
  Chain chain = f.build(1, cfg);
  EXPECT_EQ(chain.size(), 2u);
  EXPECT_EQ(chain.tip().prev_hash, chain.blocks()[0].block_hash);
  EXPECT_TRUE(validate_chain(chain, cfg).ok());
}

TEST(AppendBlock, RejectsZeroPrevHash) {
  Fixture f;
  ConsensusConfig cfg;
  Chain chain = f.build(2, cfg);
  Block b = make_block(chain, f.alice, 9, {});
  b.prev_hash = Digest{};
  seal_block(b, cfg);
  try {
    append_block(chain, b, cfg);
    FAIL();
  } catch (const LedgerError& e) {
    EXPECT_EQ(e.code(), LedgerErrc::BadLink);
  }
}

TEST(AppendBlock, ReorderedTransactionsBreakRoot) {
  Fixture f;
  ConsensusConfig cfg;
  Chain chain;
  Block b = make_block(chain, f.alice, 1, {f.tx(1, 1), f.tx(2, 1)});
  seal_block(b, cfg);
  std::swap(b.transactions[0], b.transactions[1]);
  ASSERT_NE(merkle_oracle(b.transactions), b.tx_root);
  try {
    append_block(chain, b, cfg);
    FAIL();
  } catch (const LedgerError& e) {
    EXPECT_EQ(e.code(), LedgerErrc::BadRoot);
  }
}

TEST(AppendBlock, RejectsHashAboveTarget) {
  Fixture f;
  ConsensusConfig cfg;
  Chain chain;
  Block b = make_block(chain, f.alice, 1, {});
  // Find a nonce that misses the target and present it as sealed.
  for (b.nonce = 0; below_target(compute_block_hash(b), cfg.pow_target); ++b.nonce) {
  }
  b.block_hash = compute_block_hash(b);
  try {
    append_block(chain, b, cfg);
    FAIL();
  } catch (const LedgerError& e) {
    EXPECT_EQ(e.code(), LedgerErrc::BadProof);
  }
}

TEST(AppendBlock, PosRequiresElectedLeader) {
  Address a{"A"}, b{"B"};
  CoinAgeLedger stakes;
  stakes.add(a, 3, 0);
  stakes.add(b, 1, 0);
  ConsensusConfig cfg;
  cfg.mode = ConsensusMode::PoS;
  cfg.pos_seed = 5;
  Chain chain;
  for (std::uint64_t h = 1; h <= 20; ++h) {
    auto leader = pos_leader(stakes, h, cfg.pos_seed, h);
    auto loser = leader == a ? b : a;
    Block wrong = make_block(chain, loser, h, {});
    seal_block(wrong, cfg);
    auto before = stakes;
    EXPECT_THROW(append_block(chain, wrong, cfg, &stakes), LedgerError);
    EXPECT_EQ(stakes, before);
    Block right = make_block(chain, leader, h, {});
    seal_block(right, cfg);
    append_block(chain, right, cfg, &stakes);
    EXPECT_EQ(stakes.coin_age(leader, h), 0u);
  }
  EXPECT_TRUE(validate_chain(chain).ok());
}

TEST(ValidateChain, GenesisOnlyAndBuiltChainsAreOk) {
  Fixture f;
  EXPECT_TRUE(validate_chain(Chain{}).ok());
  ConsensusConfig cfg;
  EXPECT_TRUE(validate_chain(f.build(10, cfg), cfg).ok());
}

TEST(ValidateChain, PayloadFlipInBlockFour) {
  Fixture f;
  ConsensusConfig cfg;
  Chain chain = f.build(10, cfg);
  auto blocks = chain.blocks();
  blocks[4].transactions[1].payload[0] ^= 0x01;
  auto report = validate_chain(Chain::from_blocks(blocks));
  ASSERT_FALSE(report.ok());
  EXPECT_EQ(report.first_invalid(), 4u);

  // An attacker who also repairs block 4's root and hash breaks the link to 5.
  blocks[4].transactions[1].tx_id = tx_digest(blocks[4].transactions[1]);
  blocks[4].tx_root = compute_tx_root(blocks[4].transactions);
  blocks[4].block_hash = compute_block_hash(blocks[4]);
  report = validate_chain(Chain::from_blocks(blocks));
  ASSERT_EQ(report.faults.size(), 1u);
  EXPECT_EQ(report.faults[0].index, 5u);
}

TEST(ValidateChain, EveryHeaderFieldIsCovered) {
  Fixture f;
  ConsensusConfig cfg;
  Chain chain = f.build(4, cfg);
  for (std::size_t k = 1; k < chain.size(); ++k) {
    auto mutate = [&](auto&& fn) {
      auto blocks = chain.blocks();
      fn(blocks[k]);
      auto r = validate_chain(Chain::from_blocks(blocks));
      ASSERT_FALSE(r.ok());
      EXPECT_LE(*r.first_invalid(), k);
    };
    mutate([](Block& b) { b.nonce ^= 1; });
    mutate([](Block& b) { b.timestamp += 100; });
    mutate([](Block& b) { b.creator.value += "x"; });
    mutate([](Block& b) { b.tx_root.bytes[3] ^= 0x10; });
    mutate([](Block& b) { b.prev_hash.bytes[0] ^= 0x80; });
    mutate([](Block& b) { b.block_hash.bytes[31] ^= 0x01; });
    mutate([](Block& b) { b.transactions[0].amount += 1; });
    mutate([](Block& b) { b.transactions.pop_back(); });
  }
}

TEST(ChainExport, BitExactRoundTrip) {
  Fixture f;
  ConsensusConfig cfg;
  Chain chain = f.build(5, cfg);
  std::stringstream s;
  export_chain(chain, s);
  Chain back = import_chain(s);
  EXPECT_EQ(back, chain);
  std::stringstream again;
  export_chain(back, again);
  EXPECT_EQ(again.str(), s.str());
}

TEST(ChainExport, CorruptLineThrows) {
  std::stringstream s("00ff\n");
  EXPECT_THROW(import_chain(s), DecodeError);
}
