#include "beac/domain_state.hpp"

#include <sstream>

#include "beac/error.hpp"

namespace beac {
namespace {

std::string fp_text(const Fingerprint& f) {
  return f.is_special() ? f.label() : f.hex();
}

std::string target_text(const Fingerprint& device,
                        const std::optional<std::string>& service) {
  return fp_text(device) + (service ? "/" + *service : "");
}

template <class T>
std::optional<Fingerprint> domain_field(const T& p) {
  if constexpr (requires { p.domain; }) {
    return p.domain;
  } else {
    return std::nullopt;
  }
}

std::optional<Fingerprint> domain_of(const Payload& payload) {
  return std::visit([](const auto& p) { return domain_field(p); }, payload);
}

void render_acl(std::ostream& os, const Acl& acl, int depth) {
  for (const auto& [user, perm] : acl) {
    os << std::string(depth * 2, ' ') << "acl " << fp_text(user) << " "
       << to_string(perm) << "\n";
  }
}

void render_node(std::ostream& os, const DeviceTree& tree,
                 const DeviceNode& node, int depth) {
  std::string pad(depth * 2, ' ');
  os << pad << "device " << fp_text(node.device) << " owner "
     << fp_text(node.owner) << "\n";
  render_acl(os, node.acl, depth + 1);
  for (const auto& [name, acl] : node.services) {
    os << pad << "  service " << name << "\n";
    render_acl(os, acl, depth + 2);
  }
  for (const auto& child : node.children) {
    render_node(os, tree, *tree.find(child), depth + 1);
  }
}

std::string join(const std::set<Uid>& uids) {
  std::string out;
  for (auto uid : uids) out += (out.empty() ? "" : ",") + std::to_string(uid);
  return out;
}

}  // namespace

DomainState::DomainState(const DomainRegistration& genesis) : tree_(genesis) {
  if (genesis.model == AccessModel::kAbac) attributes_.emplace(genesis.domain);
  if (genesis.model == AccessModel::kRbac) roles_.emplace(genesis.domain);
}

void DomainState::require_domain_owner(const Fingerprint& issuer,
                                       std::string_view kind) const {
  if (issuer != owner()) {
    throw Error(ErrorCode::kUnauthorized,
                std::string(kind) + " issued by " + issuer.label() +
                    ", not the domain owner");
  }
}

void DomainState::apply(const SignedRecord& record) {
  const auto& payload = record.payload;
  if (is_dac_kind(payload)) {
    apply_dac(tree_, record);
    return;
  }
  if (std::holds_alternative<TokenCommit>(payload)) return;

  auto target_domain = domain_of(payload);
  if (!target_domain || *target_domain != domain()) return;

  bool abac = is_abac_kind(payload);
  auto wanted = abac ? AccessModel::kAbac : AccessModel::kRbac;
  if (model() != wanted) {
    throw Error(ErrorCode::kModelMismatch,
                std::string(kind_name(payload)) + " sent to a " +
                    std::string(to_string(model())) + " domain");
  }
  require_domain_owner(record.issuer, kind_name(payload));

  auto require_device = [&](const Fingerprint& device) {
    if (!tree_.find(device)) {
      throw Error(ErrorCode::kUnknownDevice,
                  "device " + device.label() + " is not in this domain");
    }
  };

  if (abac) {
    if (const auto* p = std::get_if<AssignAttributeDevice>(&payload)) {
      require_device(p->device);
    }
    apply_abac(*attributes_, payload);
    return;
  }

  if (const auto* p = std::get_if<AssignRolePermission>(&payload)) {
    require_device(p->device);
  } else if (const auto* batch = std::get_if<RoleBatch>(&payload)) {
    for (std::size_t i = 0; i < batch->ops.size(); ++i) {
      auto op_domain = domain_of(to_payload(batch->ops[i]));
      if (op_domain != batch->domain) {
        throw Error(ErrorCode::kBatchAbort,
                    "op " + std::to_string(i) + " targets another domain", i);
      }
      if (const auto* rp = std::get_if<AssignRolePermission>(&batch->ops[i]);
          rp && !tree_.find(rp->device)) {
        throw Error(ErrorCode::kBatchAbort,
                    "op " + std::to_string(i) + " names unknown device " +
                        rp->device.label(),
                    i);
      }
    }
  }
  apply_rbac(*roles_, payload);
}

Decision DomainState::check_access(const Fingerprint& user,
                                   const Fingerprint& device,
                                   const std::optional<std::string>& service,
                                   PermissionType permission) const {
  if (attributes_) {
    return check_access_abac(*attributes_, tree_, user, device, service,
                             permission);
  }
  if (roles_) {
    return check_access_rbac(*roles_, tree_, user, device, service, permission);
  }
  return check_access_dac(tree_, user, device, service, permission);
}

DomainState replay_domain(std::span<const SignedRecord> records,
                          const Fingerprint& activation_user,
                          std::vector<std::string>* warnings) {
  auto it = records.begin();
  for (; it != records.end(); ++it) {
    const auto* reg = std::get_if<DomainRegistration>(&it->payload);
    if (reg && reg->owner == activation_user) break;
  }
  if (it == records.end()) {
    throw Error(ErrorCode::kNoGenesis,
                "no domain registration owned by " + activation_user.label());
  }
  DomainState state(std::get<DomainRegistration>(it->payload));
  for (++it; it != records.end(); ++it) {
    if (std::holds_alternative<TokenCommit>(it->payload) && warnings) {
      warnings->push_back("ignored " + std::string(kind_name(it->payload)) +
                          " record " + to_hex(it->checksum).substr(0, 16));
    }
    state.apply(*it);
  }
  return state;
}

const DomainState* WorldState::domain(const Fingerprint& id) const {
  auto it = domains_.find(id);
  return it == domains_.end() ? nullptr : &it->second;
}

const DomainState* WorldState::domain_of_device(const Fingerprint& device) const {
  for (const auto& [id, state] : domains_) {
    if (state.tree().find(device)) return &state;
  }
  return nullptr;
}

const DomainState* WorldState::domain_of_owner(const Fingerprint& owner) const {
  for (const auto& [id, state] : domains_) {
    if (state.tree().is_known(owner)) return &state;
  }
  return nullptr;
}

DomainState* WorldState::route(const Payload& payload) {
  const DomainState* found = nullptr;
  if (const auto* reg = std::get_if<DeviceRegistration>(&payload)) {
    found = domain_of_owner(reg->owner);
  } else if (const auto* rev = std::get_if<DeviceRevocation>(&payload)) {
    found = domain_of_device(rev->device);
  } else if (const auto* g = std::get_if<PermissionGranted>(&payload)) {
    found = domain_of_device(g->device);
  } else if (const auto* r = std::get_if<PermissionRevoked>(&payload)) {
    found = domain_of_device(r->device);
  } else if (auto id = domain_of(payload)) {
    found = domain(*id);
    if (!found) {
      throw Error(ErrorCode::kUnknownDomain,
                  std::string(kind_name(payload)) + " names unknown domain " +
                      id->label());
    }
  }
  return const_cast<DomainState*>(found);
}

void WorldState::apply(const SignedRecord& record) {
  if (const auto* reg = std::get_if<DomainRegistration>(&record.payload)) {
    if (domains_.count(reg->domain)) {
      throw Error(ErrorCode::kImmutabilityViolation,
                  "domain " + reg->domain.label() + " registered twice");
    }
    if (reg->domain.is_special()) {
      throw Error(ErrorCode::kConsistency, "reserved fingerprint as domain id");
    }
    if (reg->owner != kNobody) {
      if (record.issuer != reg->owner) {
        throw Error(ErrorCode::kUnauthorized,
                    "domain " + reg->domain.label() +
                        " must be registered by its owner");
      }
      if (domain_of_owner(reg->owner)) {
        throw Error(ErrorCode::kConsistency,
                    reg->owner.label() + " already bootstraps a domain");
      }
    }
    domains_.emplace(reg->domain, DomainState(*reg));
    return;
  }
  if (const auto* reg = std::get_if<DeviceRegistration>(&record.payload)) {
    if (domain_of_device(reg->device) || domains_.count(reg->device)) {
      throw Error(ErrorCode::kImmutabilityViolation,
                  "device " + reg->device.label() + " is already registered");
    }
  }
  if (auto* state = route(record.payload)) state->apply(record);
}

WorldState replay_world(std::span<const SignedRecord> records) {
  WorldState world;
  for (const auto& record : records) world.apply(record);
  return world;
}

std::string render(const DeviceTree& tree) {
  std::ostringstream os;
  const auto& root = tree.root();
  os << "domain " << fp_text(root.domain) << " owner " << fp_text(root.owner)
     << " model " << to_string(root.model) << "\n";
  for (const auto& child : root.children) {
    render_node(os, tree, *tree.find(child), 1);
  }
  for (const auto& gone : tree.revoked()) {
    os << "  revoked " << fp_text(gone) << "\n";
  }
  return os.str();
}

std::string render(const DomainState& state) {
  std::ostringstream os;
  os << render(state.tree());
  if (const auto* attrs = state.attributes()) {
    os << "  attributes next_uid " << attrs->next_uid() << "\n";
    for (const auto& [uid, name] : attrs->live()) {
      os << "    attribute " << uid << " name " << to_hex(name) << "\n";
    }
    for (auto uid : attrs->nullified()) os << "    nullified " << uid << "\n";
    for (const auto& [user, uids] : attrs->user_assignments()) {
      os << "    user " << fp_text(user) << " uids " << join(uids) << "\n";
    }
    for (const auto& [target, uids] : attrs->device_assignments()) {
      os << "    target " << target_text(target.device, target.service)
         << " uids " << join(uids) << "\n";
    }
    for (const auto& t : attrs->tuples()) {
      os << "    tuple " << t.user_attribute << " " << t.device_attribute << " "
         << to_string(t.permission) << " " << to_string(t.effect) << "\n";
    }
  }
  if (const auto* roles = state.roles()) {
    os << "  roles next_uid " << roles->next_uid() << "\n";
    for (const auto& [uid, name] : roles->live()) {
      os << "    role " << uid << " name " << name << "\n";
    }
    for (auto uid : roles->nullified()) os << "    nullified " << uid << "\n";
    for (const auto& [uid, users] : roles->members()) {
      for (const auto& user : users) {
        os << "    member " << uid << " " << fp_text(user) << "\n";
      }
    }
    for (const auto& rp : roles->permissions()) {
      os << "    permission " << rp.role << " "
         << target_text(rp.target.device, rp.target.service) << " "
         << to_string(rp.permission) << " " << to_string(rp.effect) << "\n";
    }
    for (const auto& [parent, child] : roles->hierarchy()) {
      os << "    edge " << parent << " -> " << child << "\n";
    }
  }
  return os.str();
}

std::string render(const WorldState& world) {
  std::string out;
  for (const auto& [id, state] : world.domains()) out += render(state);
  return out;
}

}  // namespace beac
