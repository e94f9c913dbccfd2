#pragma once

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>

#include "roamchain/contracts.hpp"

namespace roamchain {

/// An operator's off-chain record store, addressed by exact-match query strings.
struct RecordStore {
  Address owner;
  std::map<std::string, Bytes> records;

  bool operator==(const RecordStore&) const = default;
};

/// Billable usage record kept in the HNO store.
struct ChargingRecord {
  Address user;
  std::string service;
  std::uint64_t volume = 0;
  double unit_price = 0.0;
  std::string currency;

  double total() const { return static_cast<double>(volume) * unit_price; }
  bool operator==(const ChargingRecord&) const = default;
};

Bytes encode_record(const ChargingRecord& record);
ChargingRecord decode_record(ByteView data);

enum class GatekeeperErrc { UnknownQuery, HashMismatch, EmptyQuery, BadRecord };

std::string_view to_string(GatekeeperErrc code);

class GatekeeperError : public std::runtime_error {
 public:
  GatekeeperError(GatekeeperErrc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}
  GatekeeperErrc code() const { return code_; }

 private:
  GatekeeperErrc code_;
};

void put_record(RecordStore& store, const std::string& query, Bytes data);
const Bytes& read_record(const RecordStore& store, const std::string& query);
/// Pointer anchoring the current content of `query`.
QueryPointer make_pointer(const RecordStore& store, const std::string& query);
/// Returns the record only if it still hashes to pointer.content_hash.
Bytes execute_query(const RecordStore& store, const QueryPointer& pointer);

struct AccessRequest {
  Address requester;
  QueryPointer pointer;
};

enum class DenialReason { NoPermission, HashMismatch, UnknownQuery };

std::string_view to_string(DenialReason reason);

struct Granted {
  Bytes data;
};
struct Denied {
  DenialReason reason;
};
using AccessResponse = std::variant<Granted, Denied>;

/// Grants iff an Active MNOC issued by this store's owner permits
/// (requester, query), and the data still matches both the on-chain pointer
/// hash and the requested one.
AccessResponse serve_request(const RecordStore& store, const ContractWorld& world, const AccessRequest& req);

/// JSON lines: {"query": ..., "data_hex": ...}, sorted by query.
void dump_records(const RecordStore& store, std::ostream& out);
RecordStore load_records(const Address& owner, std::istream& in);

}  // namespace roamchain
