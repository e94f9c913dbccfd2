#include "roamchain/gatekeeper.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace roamchain {

std::string_view to_string(GatekeeperErrc code) {
  switch (code) {
    case GatekeeperErrc::UnknownQuery: return "UnknownQuery";
    case GatekeeperErrc::HashMismatch: return "HashMismatch";
    case GatekeeperErrc::EmptyQuery: return "EmptyQuery";
    case GatekeeperErrc::BadRecord: return "BadRecord";
  }
  return "Unknown";
}

std::string_view to_string(DenialReason reason) {
  switch (reason) {
    case DenialReason::NoPermission: return "NoPermission";
    case DenialReason::HashMismatch: return "HashMismatch";
    case DenialReason::UnknownQuery: return "UnknownQuery";
  }
  return "Unknown";
}

Bytes encode_record(const ChargingRecord& record) {
  if (!std::isfinite(record.unit_price) || record.unit_price < 0) {
    throw GatekeeperError(GatekeeperErrc::BadRecord, "unit price must be finite and >= 0");
  }
  std::uint64_t price_bits = 0;
  std::memcpy(&price_bits, &record.unit_price, sizeof price_bits);
  Writer w;
  w.str(record.user.value).str(record.service).u64(record.volume).u64(price_bits).str(record.currency);
  return w.take();
}

ChargingRecord decode_record(ByteView data) {
  try {
    Reader r(data);
    ChargingRecord rec;
    rec.user.value = r.str();
    rec.service = r.str();
    rec.volume = r.u64();
    auto bits = r.u64();
    std::memcpy(&rec.unit_price, &bits, sizeof bits);
    rec.currency = r.str();
    r.expect_end();
    if (!std::isfinite(rec.unit_price) || rec.unit_price < 0) throw DecodeError("bad unit price");
    return rec;
  } catch (const DecodeError& e) {
    throw GatekeeperError(GatekeeperErrc::BadRecord, e.what());
  }
}

void put_record(RecordStore& store, const std::string& query, Bytes data) {
  if (query.empty()) throw GatekeeperError(GatekeeperErrc::EmptyQuery, "query must be nonempty");
  store.records[query] = std::move(data);
}

const Bytes& read_record(const RecordStore& store, const std::string& query) {
  auto it = store.records.find(query);
  if (it == store.records.end()) throw GatekeeperError(GatekeeperErrc::UnknownQuery, query);
  return it->second;
}

QueryPointer make_pointer(const RecordStore& store, const std::string& query) {
  return {query, sha256(read_record(store, query))};
}

Bytes execute_query(const RecordStore& store, const QueryPointer& pointer) {
  const auto& data = read_record(store, pointer.query);
  if (sha256(data) != pointer.content_hash) {
    throw GatekeeperError(GatekeeperErrc::HashMismatch, "record for '" + pointer.query + "' was altered");
  }
  return data;
}

AccessResponse serve_request(const RecordStore& store, const ContractWorld& world, const AccessRequest& req) {
  const QueryPointer* anchored = nullptr;
  for (const auto& [id, mnoc] : world.mnocs) {
    if (mnoc.status != MnocStatus::Active || mnoc.hno != store.owner) continue;
    if (!mnoc.permissions.contains(Permission{req.requester, req.pointer.query})) continue;
    anchored = mnoc.find_pointer(req.pointer.query);
    if (anchored != nullptr) break;
  }
  if (anchored == nullptr) return Denied{DenialReason::NoPermission};
  if (anchored->content_hash != req.pointer.content_hash) return Denied{DenialReason::HashMismatch};
  try {
    return Granted{execute_query(store, *anchored)};
  } catch (const GatekeeperError& e) {
    return Denied{e.code() == GatekeeperErrc::HashMismatch ? DenialReason::HashMismatch
                                                          : DenialReason::UnknownQuery};
  }
}

void dump_records(const RecordStore& store, std::ostream& out) {
  for (const auto& [query, data] : store.records) {
    nlohmann::ordered_json j;
    j["query"] = query;
    j["data_hex"] = to_hex(data);
    out << j.dump() << '\n';
  }
}

RecordStore load_records(const Address& owner, std::istream& in) {
  RecordStore store{owner, {}};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    put_record(store, j.at("query").get<std::string>(), from_hex(j.at("data_hex").get<std::string>()));
  }
  return store;
}

}  // namespace roamchain
