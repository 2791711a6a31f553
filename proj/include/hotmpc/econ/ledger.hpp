#pragma once

#include <json.hpp>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hotmpc/common/error.hpp"

// gTOKEN accounting in integer units. Every operation keeps
//   total_supply == sum(balances) + sum(stakes) + treasury + escrow
// and supply moves only through genesis allocation, epoch minting and the
// burned part of a slash.

namespace hotmpc::econ {

using Amount = std::uint64_t;

enum class Role { DaoMember, MpcNode, Gatekeeper, User, Fisherman };

inline std::string to_string(Role r) {
  switch (r) {
    case Role::DaoMember: return "dao";
    case Role::MpcNode: return "node";
    case Role::Gatekeeper: return "gatekeeper";
    case Role::User: return "user";
    case Role::Fisherman: return "fisherman";
  }
  return "?";
}

inline Role parse_role(const std::string& s) {
  if (s == "dao") return Role::DaoMember;
  if (s == "node") return Role::MpcNode;
  if (s == "gatekeeper") return Role::Gatekeeper;
  if (s == "user") return Role::User;
  if (s == "fisherman") return Role::Fisherman;
  throw Error(Errc::ConfigError, "unknown role " + s);
}

inline bool can_stake(Role r) { return r == Role::DaoMember || r == Role::MpcNode || r == Role::Gatekeeper; }

// Shares in basis points (1/10000).
struct EconParams {
  Amount inflation_per_epoch = 1000;
  std::uint32_t dao_share_bp = 2000;
  std::uint32_t fisherman_share_bp = 5000;
  std::uint32_t burn_share_bp = 2500;
  std::uint32_t liveness_slash_bp = 1000;
  Amount dispute_fee = 10;
  Amount min_stake_dao = 50;
  Amount min_stake_node = 100;
  Amount min_stake_gatekeeper = 100;
  Amount lease_fee = 20;
  unsigned unavailability_streak = 3;
  friend bool operator==(const EconParams&, const EconParams&) = default;

  Amount min_stake(Role r) const {
    switch (r) {
      case Role::DaoMember: return min_stake_dao;
      case Role::MpcNode: return min_stake_node;
      case Role::Gatekeeper: return min_stake_gatekeeper;
      default: return 0;
    }
  }

  void validate() const {
    if (dao_share_bp > 10000 || liveness_slash_bp > 10000 || fisherman_share_bp + burn_share_bp > 10000)
      throw Error(Errc::ConfigError, "basis-point shares out of range");
  }
};

inline void to_json(nlohmann::json& j, const EconParams& p) {
  j = {{"inflation_per_epoch", p.inflation_per_epoch},
       {"dao_share_bp", p.dao_share_bp},
       {"fisherman_share_bp", p.fisherman_share_bp},
       {"burn_share_bp", p.burn_share_bp},
       {"liveness_slash_bp", p.liveness_slash_bp},
       {"dispute_fee", p.dispute_fee},
       {"min_stake_dao", p.min_stake_dao},
       {"min_stake_node", p.min_stake_node},
       {"min_stake_gatekeeper", p.min_stake_gatekeeper},
       {"lease_fee", p.lease_fee},
       {"unavailability_streak", p.unavailability_streak}};
}

// Missing keys keep their current value, so partial objects act as patches.
inline void apply_patch(EconParams& p, const nlohmann::json& j) {
  auto take = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  for (const auto& [key, _] : j.items()) {
    static const std::set<std::string> known{"inflation_per_epoch", "dao_share_bp",     "fisherman_share_bp",
                                             "burn_share_bp",       "liveness_slash_bp", "dispute_fee",
                                             "min_stake_dao",       "min_stake_node",   "min_stake_gatekeeper",
                                             "lease_fee",           "unavailability_streak"};
    if (!known.contains(key)) throw Error(Errc::ConfigError, "unknown economic parameter " + key);
  }
  take("inflation_per_epoch", p.inflation_per_epoch);
  take("dao_share_bp", p.dao_share_bp);
  take("fisherman_share_bp", p.fisherman_share_bp);
  take("burn_share_bp", p.burn_share_bp);
  take("liveness_slash_bp", p.liveness_slash_bp);
  take("dispute_fee", p.dispute_fee);
  take("min_stake_dao", p.min_stake_dao);
  take("min_stake_node", p.min_stake_node);
  take("min_stake_gatekeeper", p.min_stake_gatekeeper);
  take("lease_fee", p.lease_fee);
  take("unavailability_streak", p.unavailability_streak);
  p.validate();
}

inline void from_json(const nlohmann::json& j, EconParams& p) {
  p = EconParams{};
  apply_patch(p, j);
}

struct Stake {
  Role role = Role::MpcNode;
  Amount amount = 0;
  friend bool operator==(const Stake&, const Stake&) = default;
};

struct SlashSplit {
  Amount slashed = 0;
  Amount fisherman = 0;
  Amount burned = 0;
  Amount treasury = 0;
  friend bool operator==(const SlashSplit&, const SlashSplit&) = default;
};

// Floor shares for fisherman and burn; the treasury takes the remainder, so
// the three parts always add up to the slashed amount.
inline SlashSplit split_slash(Amount slashed, const EconParams& p) {
  SlashSplit s{slashed, 0, 0, 0};
  s.fisherman = static_cast<Amount>((static_cast<unsigned __int128>(slashed) * p.fisherman_share_bp) / 10000);
  s.burned = static_cast<Amount>((static_cast<unsigned __int128>(slashed) * p.burn_share_bp) / 10000);
  s.treasury = slashed - s.fisherman - s.burned;
  return s;
}

struct MintResult {
  std::uint64_t epoch = 0;
  Amount minted = 0;
  std::map<std::string, Amount> rewards;  // nodes and DAO members
  Amount to_treasury = 0;
  std::map<std::string, Amount> lease_paid;
  std::vector<std::string> lease_unpaid;
};

class Ledger {
 public:
  explicit Ledger(EconParams params = {}) : params_(params) { params_.validate(); }

  const EconParams& params() const { return params_; }
  const std::optional<EconParams>& pending_params() const { return pending_; }
  void schedule_params(const EconParams& p) {
    p.validate();
    pending_ = p;
  }

  std::uint64_t epoch() const { return epoch_; }
  bool epoch_open() const { return open_; }
  Amount total_supply() const { return supply_; }
  Amount treasury() const { return treasury_; }
  Amount escrow() const { return escrow_; }
  Amount burned() const { return burned_; }
  Amount minted() const { return minted_; }

  Amount balance(const std::string& account) const {
    auto it = balances_.find(account);
    return it == balances_.end() ? 0 : it->second;
  }
  std::optional<Stake> stake_of(const std::string& account) const {
    auto it = stakes_.find(account);
    if (it == stakes_.end()) return std::nullopt;
    return it->second;
  }
  Amount staked(const std::string& account) const {
    auto s = stake_of(account);
    return s ? s->amount : 0;
  }
  const std::map<std::string, Amount>& balances() const { return balances_; }
  const std::map<std::string, Stake>& stakes() const { return stakes_; }

  bool role_active(const std::string& account, Role role) const {
    auto it = stakes_.find(account);
    return it != stakes_.end() && it->second.role == role && it->second.amount >= params_.min_stake(role) &&
           it->second.amount > 0;
  }

  std::vector<std::string> active(Role role) const {
    std::vector<std::string> out;
    for (const auto& [acct, s] : stakes_)
      if (role_active(acct, role)) out.push_back(acct);
    return out;
  }

  // Initial token distribution; counts as supply.
  void allocate(const std::string& account, Amount amount) {
    balances_[account] += amount;
    supply_ += amount;
  }

  void transfer(const std::string& from, const std::string& to, Amount amount) {
    debit(from, amount);
    balances_[to] += amount;
  }

  void admit_dao_member(const std::string& account) { dao_admitted_.insert(account); }
  bool dao_admitted(const std::string& account) const { return dao_admitted_.contains(account); }

  void stake(const std::string& account, Role role, Amount amount) {
    if (!can_stake(role)) throw Error(Errc::Unauthorized, to_string(role) + " accounts do not stake");
    if (role == Role::DaoMember && !dao_admitted_.contains(account)) throw Error(Errc::NotMember, account);
    auto it = stakes_.find(account);
    if (it != stakes_.end() && it->second.role != role && it->second.amount > 0)
      throw Error(Errc::Unauthorized, account + " already stakes as " + to_string(it->second.role));
    if (balance(account) < amount) throw Error(Errc::InsufficientBalance, account);
    Amount total = (it == stakes_.end() ? 0 : it->second.amount) + amount;
    if (total < params_.min_stake(role))
      throw Error(Errc::BelowMinimum, account + " needs " + std::to_string(params_.min_stake(role)));
    debit(account, amount);
    stakes_[account] = Stake{role, total};
  }

  // Leaving the stake below the minimum is allowed and deactivates the role.
  void unstake(const std::string& account, Amount amount) {
    auto it = stakes_.find(account);
    if (it == stakes_.end() || it->second.amount < amount) throw Error(Errc::InsufficientBalance, account + " stake");
    it->second.amount -= amount;
    balances_[account] += amount;
  }

  void close_epoch() { open_ = false; }

  // Rewards: the DAO share is split evenly among active DAO members, the rest
  // among active MPC nodes in proportion to participation. Rounding dust and
  // unclaimed parts go to the treasury. Gatekeepers pay their lease.
  MintResult epoch_mint(const std::map<std::string, std::uint64_t>& participation) {
    if (open_) throw Error(Errc::EpochOpen, "close epoch " + std::to_string(epoch_) + " first");
    using u128 = unsigned __int128;
    MintResult r;
    r.epoch = epoch_;
    Amount inflation = params_.inflation_per_epoch;
    r.minted = inflation;
    supply_ += inflation;
    minted_ += inflation;

    Amount dao_part = static_cast<Amount>(u128(inflation) * params_.dao_share_bp / 10000);
    Amount node_part = inflation - dao_part;
    Amount paid = 0;

    auto members = active(Role::DaoMember);
    if (!members.empty()) {
      Amount each = dao_part / members.size();
      for (const auto& m : members) {
        balances_[m] += each;
        r.rewards[m] += each;
        paid += each;
      }
    }

    std::uint64_t total_weight = 0;
    std::map<std::string, std::uint64_t> weights;
    for (const auto& [acct, w] : participation)
      if (w > 0 && role_active(acct, Role::MpcNode)) {
        weights[acct] = w;
        total_weight += w;
      }
    if (total_weight > 0) {
      for (const auto& [acct, w] : weights) {
        Amount share = static_cast<Amount>(u128(node_part) * w / total_weight);
        balances_[acct] += share;
        r.rewards[acct] += share;
        paid += share;
      }
    }
    r.to_treasury = inflation - paid;
    treasury_ += r.to_treasury;

    for (const auto& g : active(Role::Gatekeeper)) {
      if (balance(g) >= params_.lease_fee) {
        balances_[g] -= params_.lease_fee;
        treasury_ += params_.lease_fee;
        r.lease_paid[g] = params_.lease_fee;
      } else {
        r.lease_unpaid.push_back(g);
      }
    }

    if (pending_) {
      params_ = *pending_;
      pending_.reset();
    }
    ++epoch_;
    open_ = true;
    return r;
  }

  // Fee handling for disputes.
  void escrow_fee(const std::string& account, Amount fee) {
    debit(account, fee);
    escrow_ += fee;
  }
  void refund_fee(const std::string& account, Amount fee) {
    release(fee);
    balances_[account] += fee;
  }
  void forfeit_fee(Amount fee) {
    release(fee);
    treasury_ += fee;
  }

  SlashSplit slash(const std::string& accused, Amount amount, const std::string& fisherman) {
    auto it = stakes_.find(accused);
    if (it == stakes_.end()) throw Error(Errc::UnknownAccused, accused);
    amount = std::min(amount, it->second.amount);
    auto s = split_slash(amount, params_);
    it->second.amount -= amount;
    balances_[fisherman] += s.fisherman;
    treasury_ += s.treasury;
    burned_ += s.burned;
    supply_ -= s.burned;
    return s;
  }

  // Conservation check; true when the identity holds exactly.
  bool conserved() const {
    using u128 = unsigned __int128;
    u128 sum = u128(treasury_) + escrow_;
    for (const auto& [_, b] : balances_) sum += b;
    for (const auto& [_, s] : stakes_) sum += s.amount;
    return sum == supply_;
  }

  nlohmann::json to_json() const {
    nlohmann::json stakes = nlohmann::json::object();
    for (const auto& [a, s] : stakes_) stakes[a] = {{"role", to_string(s.role)}, {"amount", s.amount}};
    return {{"params", params_},
            {"pending_params", pending_ ? nlohmann::json(*pending_) : nlohmann::json(nullptr)},
            {"epoch", epoch_},
            {"open", open_},
            {"supply", supply_},
            {"treasury", treasury_},
            {"escrow", escrow_},
            {"burned", burned_},
            {"minted", minted_},
            {"balances", balances_},
            {"stakes", stakes},
            {"dao_admitted", dao_admitted_}};
  }

  static Ledger from_json(const nlohmann::json& j) {
    Ledger l(j.at("params").get<EconParams>());
    if (!j.at("pending_params").is_null()) l.pending_ = j.at("pending_params").get<EconParams>();
    l.epoch_ = j.at("epoch");
    l.open_ = j.at("open");
    l.supply_ = j.at("supply");
    l.treasury_ = j.at("treasury");
    l.escrow_ = j.at("escrow");
    l.burned_ = j.at("burned");
    l.minted_ = j.at("minted");
    l.balances_ = j.at("balances").get<std::map<std::string, Amount>>();
    for (const auto& [a, s] : j.at("stakes").items())
      l.stakes_[a] = Stake{parse_role(s.at("role")), s.at("amount").get<Amount>()};
    l.dao_admitted_ = j.at("dao_admitted").get<std::set<std::string>>();
    return l;
  }

 private:
  void debit(const std::string& account, Amount amount) {
    auto it = balances_.find(account);
    if (it == balances_.end() || it->second < amount) throw Error(Errc::InsufficientBalance, account);
    it->second -= amount;
  }
  void release(Amount fee) {
    if (escrow_ < fee) throw Error(Errc::InsufficientBalance, "escrow");
    escrow_ -= fee;
  }

  EconParams params_;
  std::optional<EconParams> pending_;
  std::uint64_t epoch_ = 0;
  bool open_ = true;
  Amount supply_ = 0;
  Amount treasury_ = 0;
  Amount escrow_ = 0;
  Amount burned_ = 0;
  Amount minted_ = 0;
  std::map<std::string, Amount> balances_;
  std::map<std::string, Stake> stakes_;
  std::set<std::string> dao_admitted_;
};

}  // namespace hotmpc::econ
