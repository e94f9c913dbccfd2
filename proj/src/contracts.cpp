#include "roamchain/contracts.hpp"

#include <algorithm>
#include <ostream>

#include <json.hpp>

namespace roamchain {

const QueryPointer* MnocContract::find_pointer(std::string_view query) const {
  for (const auto& p : pointers)
    if (p.query == query) return &p;
  return nullptr;
}

Relationship* CursoryContract::find(const Digest& mnoc_id) {
  for (auto& r : relationships)
    if (r.mnoc_id == mnoc_id) return &r;
  return nullptr;
}

const Relationship* CursoryContract::find(const Digest& mnoc_id) const {
  return const_cast<CursoryContract*>(this)->find(mnoc_id);
}

const RegistrarEntry* ContractWorld::lookup(const Address& address) const {
  auto it = id_by_address.find(address);
  if (it == id_by_address.end()) return nullptr;
  return &registrar.at(it->second);
}

const MnocContract* ContractWorld::find_mnoc(const Digest& id) const {
  auto it = mnocs.find(id);
  return it == mnocs.end() ? nullptr : &it->second;
}

std::string_view to_string(Role role) { return role == Role::User ? "User" : "Operator"; }

std::string_view to_string(MnocStatus status) {
  switch (status) {
    case MnocStatus::Proposed: return "Proposed";
    case MnocStatus::UserAccepted: return "UserAccepted";
    case MnocStatus::Active: return "Active";
    case MnocStatus::Closed: return "Closed";
  }
  return "Unknown";
}

std::string_view to_string(RelationshipStatus status) {
  switch (status) {
    case RelationshipStatus::New: return "New";
    case RelationshipStatus::AwaitingUpdate: return "AwaitingUpdate";
    case RelationshipStatus::Accepted: return "Accepted";
    case RelationshipStatus::Rejected: return "Rejected";
  }
  return "Unknown";
}

std::string_view to_string(ContractErrc code) {
  switch (code) {
    case ContractErrc::DuplicateId: return "DuplicateId";
    case ContractErrc::DuplicateAddress: return "DuplicateAddress";
    case ContractErrc::PolicyDenied: return "PolicyDenied";
    case ContractErrc::UnknownParty: return "UnknownParty";
    case ContractErrc::RoleMismatch: return "RoleMismatch";
    case ContractErrc::SelfRoam: return "SelfRoam";
    case ContractErrc::EmptyPointers: return "EmptyPointers";
    case ContractErrc::DuplicateContract: return "DuplicateContract";
    case ContractErrc::UnknownContract: return "UnknownContract";
    case ContractErrc::WrongState: return "WrongState";
    case ContractErrc::WrongSigner: return "WrongSigner";
    case ContractErrc::BadSignature: return "BadSignature";
    case ContractErrc::UnknownQuery: return "UnknownQuery";
    case ContractErrc::NotCounterparty: return "NotCounterparty";
    case ContractErrc::UnknownRelationship: return "UnknownRelationship";
    case ContractErrc::UnknownOwner: return "UnknownOwner";
    case ContractErrc::DecodeError: return "DecodeError";
  }
  return "Unknown";
}

namespace {

[[noreturn]] void fail(ContractErrc code, const std::string& detail) { throw ContractError(code, detail); }

const RegistrarEntry& require_party(const ContractWorld& world, const Address& a, Role role,
                                    std::string_view what) {
  const auto* entry = world.lookup(a);
  if (entry == nullptr) fail(ContractErrc::UnknownParty, std::string(what) + " " + a.value + " not registered");
  if (entry->role != role) {
    fail(ContractErrc::RoleMismatch, std::string(what) + " " + a.value + " is not a " + std::string(to_string(role)));
  }
  return *entry;
}

MnocContract& require_mnoc(ContractWorld& world, const Digest& id) {
  auto it = world.mnocs.find(id);
  if (it == world.mnocs.end()) fail(ContractErrc::UnknownContract, "no MNOC " + id.hex());
  return it->second;
}

void encode_pointers(Writer& w, const std::vector<QueryPointer>& pointers) {
  w.u32(static_cast<std::uint32_t>(pointers.size()));
  for (const auto& p : pointers) w.str(p.query).digest(p.content_hash);
}

std::vector<QueryPointer> decode_pointers(Reader& r) {
  auto n = r.u32();
  std::vector<QueryPointer> out;
  for (std::uint32_t i = 0; i < n; ++i) {
    QueryPointer p;
    p.query = r.str();
    p.content_hash = r.digest();
    out.push_back(std::move(p));
  }
  return out;
}

void encode_reference(Writer& w, const std::optional<Digest>& ref, bool settles) {
  w.u8(ref ? 1 : 0);
  if (ref) w.digest(*ref);
  w.u8(settles ? 1 : 0);
}

std::uint8_t decode_flag(Reader& r) {
  auto v = r.u8();
  if (v > 1) throw DecodeError("flag byte out of range");
  return v;
}

template <class Payment>
Payment decode_payment(Reader& r) {
  Payment p;
  p.payer.value = r.str();
  p.payee.value = r.str();
  if (decode_flag(r) == 1) p.mnoc_id = r.digest();
  p.settles = decode_flag(r) == 1;
  return p;
}

template <class Payment>
void check_payment(const ContractWorld& world, const Transaction& tx, const Payment& pay, Role payer_role) {
  if (tx.signer != pay.payer) fail(ContractErrc::WrongSigner, "payment must be signed by the payer");
  require_party(world, pay.payer, payer_role, "payer");
  require_party(world, pay.payee, Role::Operator, "payee");
  if (!pay.mnoc_id) {
    if (pay.settles) fail(ContractErrc::WrongState, "unreferenced payment cannot settle an MNOC");
    return;
  }
  const auto* mnoc = world.find_mnoc(*pay.mnoc_id);
  if (mnoc == nullptr) fail(ContractErrc::UnknownContract, "payment references unknown MNOC");
  if (mnoc->status != MnocStatus::Active) fail(ContractErrc::WrongState, "payment requires an Active MNOC");
  const Address& expected_payer = payer_role == Role::User ? mnoc->user : mnoc->hno;
  if (pay.payer != expected_payer || pay.payee != mnoc->vno) {
    fail(ContractErrc::NotCounterparty, "payment parties do not match the MNOC");
  }
}

}  // namespace

void register_identity(ContractWorld& world, const std::string& id_string, const Address& address,
                       Role role) {
  if (id_string.empty()) fail(ContractErrc::DecodeError, "empty id_string");
  if (address.empty()) fail(ContractErrc::DecodeError, "empty address");
  if (world.registrar.contains(id_string)) fail(ContractErrc::DuplicateId, id_string);
  if (world.id_by_address.contains(address)) fail(ContractErrc::DuplicateAddress, address.value);
  if (role == Role::Operator && world.policy.allowlist_enabled && !world.policy.allowlist.contains(address)) {
    fail(ContractErrc::PolicyDenied, "operator " + address.value + " is not a participant");
  }
  world.registrar.emplace(id_string, RegistrarEntry{id_string, address, role});
  world.id_by_address.emplace(address, id_string);
  world.ccs.emplace(address, CursoryContract{address, {}});
}

Digest mnoc_contract_id(const Address& hno, const Address& vno, const Address& user,
                        const std::vector<QueryPointer>& pointers, std::uint64_t issued_at) {
  Writer w;
  w.str("mnoc").str(hno.value).str(vno.value).str(user.value);
  encode_pointers(w, pointers);
  w.u64(issued_at);
  return sha256(w.data());
}

Digest issue_mnoc(ContractWorld& world, const Address& hno, const Address& vno, const Address& user,
                  std::vector<QueryPointer> pointers, std::uint64_t issued_at) {
  require_party(world, hno, Role::Operator, "hno");
  require_party(world, vno, Role::Operator, "vno");
  require_party(world, user, Role::User, "user");
  if (hno == vno) fail(ContractErrc::SelfRoam, "hno and vno are the same operator");
  if (pointers.empty()) fail(ContractErrc::EmptyPointers, "MNOC needs at least one data pointer");
  for (const auto& p : pointers) {
    if (p.query.empty()) fail(ContractErrc::EmptyPointers, "pointer with empty query");
  }
  auto id = mnoc_contract_id(hno, vno, user, pointers, issued_at);
  if (world.mnocs.contains(id)) fail(ContractErrc::DuplicateContract, id.hex());

  MnocContract c;
  c.contract_id = id;
  c.hno = hno;
  c.vno = vno;
  c.user = user;
  c.pointers = std::move(pointers);
  c.issued_at = issued_at;
  world.mnocs.emplace(id, std::move(c));
  for (const auto* party : {&user, &hno, &vno}) {
    world.ccs[*party].owner = *party;
    world.ccs[*party].relationships.push_back({id, RelationshipStatus::New});
  }
  return id;
}

void accept_terms(ContractWorld& world, const Digest& mnoc_id, const Transaction& acceptance_tx,
                  const KeyRing& keys) {
  if (acceptance_tx.kind != TxKind::TermsAcceptance) {
    fail(ContractErrc::DecodeError, "acceptance must be a TermsAcceptance transaction");
  }
  auto action = decode_action(acceptance_tx.kind, acceptance_tx.payload);
  if (std::get<AcceptTermsAction>(action).mnoc_id != mnoc_id) {
    fail(ContractErrc::DecodeError, "acceptance names a different MNOC");
  }
  auto& mnoc = require_mnoc(world, mnoc_id);
  if (acceptance_tx.signer != mnoc.user) fail(ContractErrc::WrongSigner, "acceptance not signed by the MNOC user");
  if (!keys.verify(acceptance_tx)) fail(ContractErrc::BadSignature, "acceptance signature does not verify");
  if (mnoc.status != MnocStatus::Proposed) {
    fail(ContractErrc::WrongState, std::string("MNOC is ") + std::string(to_string(mnoc.status)));
  }
  auto* rel = world.ccs.at(mnoc.user).find(mnoc_id);
  if (rel == nullptr) fail(ContractErrc::UnknownRelationship, "user CC lacks the MNOC");
  if (rel->status == RelationshipStatus::Rejected || rel->status == RelationshipStatus::Accepted) {
    fail(ContractErrc::WrongState, std::string("user relationship is ") + std::string(to_string(rel->status)));
  }
  mnoc.status = MnocStatus::UserAccepted;
  rel->status = RelationshipStatus::Accepted;
}

void grant_permission(ContractWorld& world, const Digest& mnoc_id, const Address& grantee,
                      const std::string& query) {
  auto& mnoc = require_mnoc(world, mnoc_id);
  if (mnoc.status != MnocStatus::UserAccepted && mnoc.status != MnocStatus::Active) {
    fail(ContractErrc::WrongState, std::string("cannot grant while MNOC is ") + std::string(to_string(mnoc.status)));
  }
  if (mnoc.find_pointer(query) == nullptr) fail(ContractErrc::UnknownQuery, query);
  if (grantee != mnoc.vno) fail(ContractErrc::NotCounterparty, grantee.value + " is not the MNOC's VNO");
  mnoc.permissions.insert({grantee, query});
  mnoc.status = MnocStatus::Active;
}

void set_cc_status(ContractWorld& world, const Address& owner, const Digest& mnoc_id,
                   RelationshipStatus status) {
  auto cc = world.ccs.find(owner);
  if (cc == world.ccs.end() || world.lookup(owner) == nullptr) fail(ContractErrc::UnknownOwner, owner.value);
  auto* rel = cc->second.find(mnoc_id);
  if (rel == nullptr) fail(ContractErrc::UnknownRelationship, mnoc_id.hex());
  if (rel->status == RelationshipStatus::Rejected) fail(ContractErrc::WrongState, "relationship was rejected");
  const auto& mnoc = world.mnocs.at(mnoc_id);
  if (status == RelationshipStatus::Rejected && mnoc.status != MnocStatus::Proposed) {
    fail(ContractErrc::WrongState, "terms can only be rejected before acceptance");
  }
  if (status == RelationshipStatus::Accepted && owner == mnoc.user) {
    fail(ContractErrc::WrongState, "user acceptance goes through a TermsAcceptance transaction");
  }
  rel->status = status;
}

std::vector<Relationship> poll_cc(const ContractWorld& world, const Address& owner) {
  auto cc = world.ccs.find(owner);
  if (cc == world.ccs.end() || world.lookup(owner) == nullptr) fail(ContractErrc::UnknownOwner, owner.value);
  return cc->second.relationships;
}

TxKind kind_of(const ContractAction& action) {
  struct Visitor {
    TxKind operator()(const RegisterIdentityAction&) const { return TxKind::IdentityRegistration; }
    TxKind operator()(const IssueMnocAction&) const { return TxKind::MnocIssue; }
    TxKind operator()(const AcceptTermsAction&) const { return TxKind::TermsAcceptance; }
    TxKind operator()(const GrantPermissionAction&) const { return TxKind::PermissionGrant; }
    TxKind operator()(const UpdateCcAction&) const { return TxKind::CcUpdate; }
    TxKind operator()(const ChargeAction&) const { return TxKind::Charge; }
    TxKind operator()(const TransferAction&) const { return TxKind::Transfer; }
  };
  return std::visit(Visitor{}, action);
}

Bytes encode_action(const ContractAction& action) {
  Writer w;
  w.u8(static_cast<std::uint8_t>(kind_of(action)));
  struct Visitor {
    Writer& w;
    void operator()(const RegisterIdentityAction& a) const {
      w.str(a.id_string).str(a.address.value).u8(static_cast<std::uint8_t>(a.role));
    }
    void operator()(const IssueMnocAction& a) const {
      w.str(a.hno.value).str(a.vno.value).str(a.user.value);
      encode_pointers(w, a.pointers);
    }
    void operator()(const AcceptTermsAction& a) const { w.digest(a.mnoc_id); }
    void operator()(const GrantPermissionAction& a) const {
      w.digest(a.mnoc_id).str(a.grantee.value).str(a.query);
    }
    void operator()(const UpdateCcAction& a) const {
      w.str(a.owner.value).digest(a.mnoc_id).u8(static_cast<std::uint8_t>(a.status));
    }
    void operator()(const ChargeAction& a) const {
      w.str(a.payer.value).str(a.payee.value);
      encode_reference(w, a.mnoc_id, a.settles);
    }
    void operator()(const TransferAction& a) const {
      w.str(a.payer.value).str(a.payee.value);
      encode_reference(w, a.mnoc_id, a.settles);
    }
  };
  std::visit(Visitor{w}, action);
  return w.take();
}

ContractAction decode_action(TxKind kind, ByteView payload) {
  try {
    Reader r(payload);
    if (r.u8() != static_cast<std::uint8_t>(kind)) throw DecodeError("payload tag does not match kind");
    ContractAction out;
    switch (kind) {
      case TxKind::IdentityRegistration: {
        RegisterIdentityAction a;
        a.id_string = r.str();
        a.address.value = r.str();
        auto role = r.u8();
        if (role != 1 && role != 2) throw DecodeError("bad role");
        a.role = static_cast<Role>(role);
        out = std::move(a);
        break;
      }
      case TxKind::MnocIssue: {
        IssueMnocAction a;
        a.hno.value = r.str();
        a.vno.value = r.str();
        a.user.value = r.str();
        a.pointers = decode_pointers(r);
        out = std::move(a);
        break;
      }
      case TxKind::TermsAcceptance: out = AcceptTermsAction{r.digest()}; break;
      case TxKind::PermissionGrant: {
        GrantPermissionAction a;
        a.mnoc_id = r.digest();
        a.grantee.value = r.str();
        a.query = r.str();
        out = std::move(a);
        break;
      }
      case TxKind::CcUpdate: {
        UpdateCcAction a;
        a.owner.value = r.str();
        a.mnoc_id = r.digest();
        auto status = r.u8();
        if (status > 3) throw DecodeError("bad relationship status");
        a.status = static_cast<RelationshipStatus>(status);
        out = std::move(a);
        break;
      }
      case TxKind::Charge: out = decode_payment<ChargeAction>(r); break;
      case TxKind::Transfer: out = decode_payment<TransferAction>(r); break;
    }
    r.expect_end();
    return out;
  } catch (const DecodeError& e) {
    fail(ContractErrc::DecodeError, e.what());
  }
}

void apply_action(ContractWorld& world, const Transaction& tx, const KeyRing& keys) {
  if (!keys.verify(tx)) fail(ContractErrc::BadSignature, "transaction signature does not verify");
  if (!is_monetary(tx.kind) && tx.amount != 0) fail(ContractErrc::DecodeError, "non-monetary kind with amount");
  auto action = decode_action(tx.kind, tx.payload);

  struct Visitor {
    ContractWorld& world;
    const Transaction& tx;
    const KeyRing& keys;

    void operator()(const RegisterIdentityAction& a) const {
      if (tx.signer != a.address) fail(ContractErrc::WrongSigner, "identities register themselves");
      register_identity(world, a.id_string, a.address, a.role);
    }
    void operator()(const IssueMnocAction& a) const {
      if (tx.signer != a.hno && tx.signer != a.vno) {
        fail(ContractErrc::WrongSigner, "MNOC must be issued by the HNO or VNO");
      }
      issue_mnoc(world, a.hno, a.vno, a.user, a.pointers, tx.timestamp);
    }
    void operator()(const AcceptTermsAction& a) const { accept_terms(world, a.mnoc_id, tx, keys); }
    void operator()(const GrantPermissionAction& a) const {
      const auto* mnoc = world.find_mnoc(a.mnoc_id);
      if (mnoc == nullptr) fail(ContractErrc::UnknownContract, a.mnoc_id.hex());
      if (tx.signer != mnoc->hno) fail(ContractErrc::WrongSigner, "permissions are granted by the HNO");
      grant_permission(world, a.mnoc_id, a.grantee, a.query);
    }
    void operator()(const UpdateCcAction& a) const {
      const auto* mnoc = world.find_mnoc(a.mnoc_id);
      bool owner_signed = tx.signer == a.owner;
      bool hno_signed = mnoc != nullptr && tx.signer == mnoc->hno;
      if (!owner_signed && !hno_signed) fail(ContractErrc::WrongSigner, "CC updates come from the owner or HNO");
      if (!owner_signed && a.status != RelationshipStatus::AwaitingUpdate) {
        fail(ContractErrc::WrongSigner, "the HNO may only flag AwaitingUpdate");
      }
      set_cc_status(world, a.owner, a.mnoc_id, a.status);
    }
    void operator()(const ChargeAction& a) const {
      check_payment(world, tx, a, Role::User);
      if (a.settles) world.mnocs.at(*a.mnoc_id).status = MnocStatus::Closed;
    }
    void operator()(const TransferAction& a) const {
      check_payment(world, tx, a, Role::Operator);
      if (a.settles) world.mnocs.at(*a.mnoc_id).status = MnocStatus::Closed;
    }
  };
  std::visit(Visitor{world, tx, keys}, action);
}

ReplayResult replay(const Chain& chain, const KeyRing& keys, RegistrarPolicy policy) {
  ReplayResult result;
  result.world.policy = std::move(policy);
  for (const auto& block : chain.blocks()) {
    for (const auto& tx : block.transactions) {
      try {
        apply_action(result.world, tx, keys);
        ++result.applied;
      } catch (const ContractError&) {
        ++result.rejected;
      }
    }
  }
  return result;
}

void export_world(const ContractWorld& world, std::ostream& out) {
  using nlohmann::ordered_json;
  for (const auto& [id, entry] : world.registrar) {
    ordered_json j;
    j["record"] = "registrar";
    j["id_string"] = entry.id_string;
    j["address"] = entry.address.value;
    j["role"] = to_string(entry.role);
    out << j.dump() << '\n';
  }
  for (const auto& [id, mnoc] : world.mnocs) {
    ordered_json j;
    j["record"] = "mnoc";
    j["contract_id"] = id.hex();
    j["hno"] = mnoc.hno.value;
    j["vno"] = mnoc.vno.value;
    j["user"] = mnoc.user.value;
    j["status"] = to_string(mnoc.status);
    j["issued_at"] = mnoc.issued_at;
    j["pointers"] = ordered_json::array();
    for (const auto& p : mnoc.pointers) j["pointers"].push_back({{"query", p.query}, {"content_hash", p.content_hash.hex()}});
    j["permissions"] = ordered_json::array();
    for (const auto& p : mnoc.permissions) j["permissions"].push_back({{"grantee", p.grantee.value}, {"query", p.query}});
    out << j.dump() << '\n';
  }
  for (const auto& [owner, cc] : world.ccs) {
    ordered_json j;
    j["record"] = "cc";
    j["owner"] = owner.value;
    j["relationships"] = ordered_json::array();
    for (const auto& r : cc.relationships) {
      j["relationships"].push_back({{"mnoc_id", r.mnoc_id.hex()}, {"status", to_string(r.status)}});
    }
    out << j.dump() << '\n';
  }
  ordered_json j;
  j["record"] = "policy";
  j["allowlist_enabled"] = world.policy.allowlist_enabled;
  j["allowlist"] = ordered_json::array();
  for (const auto& a : world.policy.allowlist) j["allowlist"].push_back(a.value);
  out << j.dump() << '\n';
}

}  // namespace roamchain
