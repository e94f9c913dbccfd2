#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "roamchain/bytes.hpp"
#include "roamchain/ledger.hpp"

namespace roamchain {

enum class Role : std::uint8_t { User = 1, Operator = 2 };

struct RegistrarEntry {
  std::string id_string;  // ICCID for users, operator code for MNOs
  Address address;
  Role role = Role::User;
  bool operator==(const RegistrarEntry&) const = default;
};

/// Query string plus the digest of the data subset it returns at mint time.
struct QueryPointer {
  std::string query;
  Digest content_hash;
  auto operator<=>(const QueryPointer&) const = default;
};

enum class MnocStatus : std::uint8_t { Proposed = 0, UserAccepted = 1, Active = 2, Closed = 3 };

struct Permission {
  Address grantee;
  std::string query;
  auto operator<=>(const Permission&) const = default;
};

struct MnocContract {
  Digest contract_id;
  Address hno;
  Address vno;
  Address user;
  std::vector<QueryPointer> pointers;
  std::set<Permission> permissions;
  MnocStatus status = MnocStatus::Proposed;
  std::uint64_t issued_at = 0;

  const QueryPointer* find_pointer(std::string_view query) const;
  bool operator==(const MnocContract&) const = default;
};

enum class RelationshipStatus : std::uint8_t { New = 0, AwaitingUpdate = 1, Accepted = 2, Rejected = 3 };

struct Relationship {
  Digest mnoc_id;
  RelationshipStatus status = RelationshipStatus::New;
  bool operator==(const Relationship&) const = default;
};

struct CursoryContract {
  Address owner;
  std::vector<Relationship> relationships;  // insertion order

  Relationship* find(const Digest& mnoc_id);
  const Relationship* find(const Digest& mnoc_id) const;
  bool operator==(const CursoryContract&) const = default;
};

struct RegistrarPolicy {
  bool allowlist_enabled = false;
  std::set<Address> allowlist;  // participant operators
  bool operator==(const RegistrarPolicy&) const = default;
};

struct ContractWorld {
  std::map<std::string, RegistrarEntry> registrar;  // keyed by id_string
  std::map<Address, std::string> id_by_address;
  std::map<Digest, MnocContract> mnocs;
  std::map<Address, CursoryContract> ccs;
  RegistrarPolicy policy;

  const RegistrarEntry* lookup(const Address& address) const;
  const MnocContract* find_mnoc(const Digest& id) const;
  bool operator==(const ContractWorld&) const = default;
};

std::string_view to_string(Role role);
std::string_view to_string(MnocStatus status);
std::string_view to_string(RelationshipStatus status);

enum class ContractErrc {
  DuplicateId,
  DuplicateAddress,
  PolicyDenied,
  UnknownParty,
  RoleMismatch,
  SelfRoam,
  EmptyPointers,
  DuplicateContract,
  UnknownContract,
  WrongState,
  WrongSigner,
  BadSignature,
  UnknownQuery,
  NotCounterparty,
  UnknownRelationship,
  UnknownOwner,
  DecodeError,
};

std::string_view to_string(ContractErrc code);

class ContractError : public std::runtime_error {
 public:
  ContractError(ContractErrc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}
  ContractErrc code() const { return code_; }

 private:
  ContractErrc code_;
};

// ---------------------------------------------------------------------------
// Transition functions. Each checks every guard before mutating, so a throw
// leaves the world untouched.

void register_identity(ContractWorld& world, const std::string& id_string, const Address& address,
                       Role role);

/// contract_id = digest(hno, vno, user, pointers, issued_at)
Digest mnoc_contract_id(const Address& hno, const Address& vno, const Address& user,
                        const std::vector<QueryPointer>& pointers, std::uint64_t issued_at);

Digest issue_mnoc(ContractWorld& world, const Address& hno, const Address& vno, const Address& user,
                  std::vector<QueryPointer> pointers, std::uint64_t issued_at);

/// acceptance_tx must be a TermsAcceptance for `mnoc_id`, signed by the MNOC user.
void accept_terms(ContractWorld& world, const Digest& mnoc_id, const Transaction& acceptance_tx,
                  const KeyRing& keys);

void grant_permission(ContractWorld& world, const Digest& mnoc_id, const Address& grantee,
                      const std::string& query);

void set_cc_status(ContractWorld& world, const Address& owner, const Digest& mnoc_id,
                   RelationshipStatus status);
std::vector<Relationship> poll_cc(const ContractWorld& world, const Address& owner);

// ---------------------------------------------------------------------------
// Transaction payloads.

struct RegisterIdentityAction {
  std::string id_string;
  Address address;
  Role role = Role::User;
  bool operator==(const RegisterIdentityAction&) const = default;
};

struct IssueMnocAction {
  Address hno;
  Address vno;
  Address user;
  std::vector<QueryPointer> pointers;
  bool operator==(const IssueMnocAction&) const = default;
};

struct AcceptTermsAction {
  Digest mnoc_id;
  bool operator==(const AcceptTermsAction&) const = default;
};

struct GrantPermissionAction {
  Digest mnoc_id;
  Address grantee;
  std::string query;
  bool operator==(const GrantPermissionAction&) const = default;
};

struct UpdateCcAction {
  Address owner;
  Digest mnoc_id;
  RelationshipStatus status = RelationshipStatus::New;
  bool operator==(const UpdateCcAction&) const = default;
};

/// Fiat payment (amount in the carrying transaction). A referenced MNOC must
/// be Active; `settles` closes it.
struct ChargeAction {
  Address payer;
  Address payee;
  std::optional<Digest> mnoc_id;
  bool settles = false;
  bool operator==(const ChargeAction&) const = default;
};

/// Crypto transfer between operators; same reference rules as ChargeAction.
struct TransferAction {
  Address payer;
  Address payee;
  std::optional<Digest> mnoc_id;
  bool settles = false;
  bool operator==(const TransferAction&) const = default;
};

using ContractAction = std::variant<RegisterIdentityAction, IssueMnocAction, AcceptTermsAction,
                                    GrantPermissionAction, UpdateCcAction, ChargeAction, TransferAction>;

TxKind kind_of(const ContractAction& action);
Bytes encode_action(const ContractAction& action);
/// Throws ContractError(DecodeError) on malformed bytes or a kind mismatch.
ContractAction decode_action(TxKind kind, ByteView payload);

/// Verifies the signature, decodes the payload, checks the signer is
/// entitled to the action and applies it. Atomic: on throw, world is unchanged.
void apply_action(ContractWorld& world, const Transaction& tx, const KeyRing& keys);

struct ReplayResult {
  ContractWorld world;
  std::size_t applied = 0;
  std::size_t rejected = 0;
};

/// Folds apply_action over every transaction in chain order. Transactions
/// whose guards fail are skipped and counted.
ReplayResult replay(const Chain& chain, const KeyRing& keys, RegistrarPolicy policy = {});

/// One JSON object per line: registrar entries, then MNOCs, then CCs, then policy.
void export_world(const ContractWorld& world, std::ostream& out);

}  // namespace roamchain
