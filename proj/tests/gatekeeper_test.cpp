#include <gtest/gtest.h>

#include <sstream>

#include "lifecycle.hpp"

using namespace roamchain;
using roamchain::testing::Lifecycle;

namespace {

struct ActiveWorld : Lifecycle {
  ContractWorld world;
  ActiveWorld() {
    for (const auto& tx : six()) apply_action(world, tx, keys);
  }
  const QueryPointer& charging() const { return *world.find_mnoc(mnoc_id)->find_pointer("charging/user"); }
};

DenialReason denial(const AccessResponse& r) {
  EXPECT_TRUE(std::holds_alternative<Denied>(r));
  return std::holds_alternative<Denied>(r) ? std::get<Denied>(r).reason : DenialReason::NoPermission;
}

}  // namespace

TEST(RecordStore, PutReadOverwrite) {
  RecordStore s{Address{"op"}, {}};
  put_record(s, "q", Bytes{1, 2});
  EXPECT_EQ(read_record(s, "q"), (Bytes{1, 2}));
  auto p = make_pointer(s, "q");
  EXPECT_EQ(p.content_hash, sha256(ByteView{read_record(s, "q")}));
  EXPECT_EQ(execute_query(s, p), (Bytes{1, 2}));
  put_record(s, "q", Bytes{1, 3});
  try {
    execute_query(s, p);
    FAIL();
  } catch (const GatekeeperError& e) {
    EXPECT_EQ(e.code(), GatekeeperErrc::HashMismatch);
  }
}

TEST(RecordStore, EmptyDataAndMissingQuery) {
  RecordStore s{Address{"op"}, {}};
  put_record(s, "empty", {});
  EXPECT_EQ(make_pointer(s, "empty").content_hash, sha256(std::string_view{}));
  EXPECT_THROW(put_record(s, "", Bytes{1}), GatekeeperError);
  try {
    execute_query(s, QueryPointer{"absent", Digest{}});
    FAIL();
  } catch (const GatekeeperError& e) {
    EXPECT_EQ(e.code(), GatekeeperErrc::UnknownQuery);
  }
}

TEST(ChargingRecord, RoundTrip) {
  ChargingRecord r{Address{"0x01"}, "data", 7, 0.25, "fiat"};
  EXPECT_EQ(decode_record(encode_record(r)), r);
  EXPECT_DOUBLE_EQ(r.total(), 1.75);
  auto bytes = encode_record(r);
  bytes.pop_back();
  EXPECT_THROW(decode_record(bytes), GatekeeperError);
}

TEST(Serve, PermittedVnoGranted) {
  ActiveWorld f;
  auto r = serve_request(f.store, f.world, {f.vno, f.charging()});
  ASSERT_TRUE(std::holds_alternative<Granted>(r));
  EXPECT_EQ(sha256(ByteView{std::get<Granted>(r).data}), f.charging().content_hash);
}

TEST(Serve, UnpermittedRequestersDenied) {
  ActiveWorld f;
  EXPECT_EQ(denial(serve_request(f.store, f.world, {f.user, f.charging()})), DenialReason::NoPermission);
  auto qos = *f.world.find_mnoc(f.mnoc_id)->find_pointer("qos/user");
  EXPECT_EQ(denial(serve_request(f.store, f.world, {f.vno, qos})), DenialReason::NoPermission);
}

TEST(Serve, OnlyTheIssuingHnoStoreServes) {
  ActiveWorld f;
  RecordStore foreign{f.vno, f.store.records};
  EXPECT_EQ(denial(serve_request(foreign, f.world, {f.vno, f.charging()})), DenialReason::NoPermission);
}

TEST(Serve, InactiveContractDenied) {
  Lifecycle f;
  ContractWorld w;
  auto txs = f.six();
  for (std::size_t i = 0; i < 5; ++i) apply_action(w, txs[i], f.keys);  // accepted, not granted
  auto ptr = *w.find_mnoc(f.mnoc_id)->find_pointer("charging/user");
  EXPECT_EQ(denial(serve_request(f.store, w, {f.vno, ptr})), DenialReason::NoPermission);
}

TEST(Serve, TamperedDataDenied) {
  ActiveWorld f;
  put_record(f.store, "charging/user", Bytes{1, 2, 3, 5});
  EXPECT_EQ(denial(serve_request(f.store, f.world, {f.vno, f.charging()})), DenialReason::HashMismatch);
}

TEST(Serve, RequesterSuppliedHashMustMatchChain) {
  ActiveWorld f;
  QueryPointer forged = f.charging();
  forged.content_hash.bytes[0] ^= 1;
  EXPECT_EQ(denial(serve_request(f.store, f.world, {f.vno, forged})), DenialReason::HashMismatch);
}

TEST(Serve, ClosedContractNoLongerServes) {
  ActiveWorld f;
  apply_action(f.world, f.make(ChargeAction{f.user, f.vno, f.mnoc_id, true}, f.user, 1), f.keys);
  EXPECT_EQ(denial(serve_request(f.store, f.world, {f.vno, f.charging()})), DenialReason::NoPermission);
}

TEST(Serve, GrantedImpliesActivePermission) {
  // Randomized worlds: for each request the oracle scans the world for an
  // Active MNOC from the store owner permitting (requester, query).
  Rng rng(404);
  for (int trial = 0; trial < 50; ++trial) {
    Lifecycle f;
    ContractWorld w;
    auto txs = f.six();
    const std::size_t upto = 3 + rng.below(4);
    for (std::size_t i = 0; i < upto; ++i) apply_action(w, txs[i], f.keys);
    if (rng.bernoulli(0.3)) put_record(f.store, "charging/user", Bytes{9});
    for (int q = 0; q < 10; ++q) {
      Address who = std::array{f.hno, f.vno, f.user}[rng.below(3)];
      QueryPointer ptr = f.pointers[rng.below(2)];
      auto r = serve_request(f.store, w, {who, ptr});
      bool permitted = false;
      for (const auto& [id, m] : w.mnocs) {
        permitted = permitted || (m.status == MnocStatus::Active && m.hno == f.store.owner &&
                                  m.permissions.contains(Permission{who, ptr.query}));
      }
      if (std::holds_alternative<Granted>(r)) {
        EXPECT_TRUE(permitted);
        EXPECT_EQ(sha256(ByteView{std::get<Granted>(r).data}), ptr.content_hash);
      }
    }
  }
}

TEST(RecordDump, RoundTrip) {
  RecordStore s{Address{"op"}, {}};
  put_record(s, "b", Bytes{0xff, 0x00});
  put_record(s, "a", {});
  std::stringstream out;
  dump_records(s, out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), R"({"query":"a","data_hex":""})");
  EXPECT_EQ(load_records(s.owner, out), s);
}
