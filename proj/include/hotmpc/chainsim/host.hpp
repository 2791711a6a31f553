#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>

#include "hotmpc/chainsim/policy.hpp"

namespace hotmpc::chainsim {

inline const std::set<std::string>& default_chains() {
  static const std::set<std::string> chains{"near", "ethereum", "bitcoin", "solana"};
  return chains;
}

// Hosts deployed policies for a fixed set of simulated chains.
class ChainHost {
 public:
  explicit ChainHost(std::set<std::string> chains = default_chains()) : chains_(std::move(chains)) {}

  ChainHost(const ChainHost& other) : chains_(other.chains_), next_(other.next_) {
    for (const auto& [addr, d] : other.contracts_) contracts_.emplace(addr, Deployed{d.chain, d.policy->clone()});
  }
  ChainHost& operator=(ChainHost other) {
    std::swap(chains_, other.chains_);
    std::swap(contracts_, other.contracts_);
    std::swap(next_, other.next_);
    return *this;
  }
  ChainHost(ChainHost&&) = default;

  const std::set<std::string>& chains() const { return chains_; }

  std::string deploy_policy(const std::string& chain_id, std::unique_ptr<Policy> policy) {
    require_chain(chain_id);
    auto address = policy->name() + "-" + std::to_string(next_++) + "." + chain_id;
    contracts_.emplace(address, Deployed{chain_id, std::move(policy)});
    return address;
  }

  std::string deploy_policy(const std::string& chain_id, const std::string& policy_name) {
    return deploy_policy(chain_id, make_policy(policy_name));
  }

  // PolicyPanic covers both a trapping contract and one whose state changed
  // during the call. Callers treat it as a refusal.
  bool hot_verify(const std::string& chain_id, const std::string& contract_address, const std::string& message,
                  const KeyId& key_id, ByteView metadata) const {
    const auto& policy = find(chain_id, contract_address);
    auto before = policy.state_hash();
    bool result;
    try {
      result = policy.hot_verify(message, key_id, metadata);
    } catch (const Error& e) {
      throw Error(Errc::PolicyPanic, contract_address + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(Errc::PolicyPanic, contract_address + ": " + e.what());
    }
    if (policy.state_hash() != before) throw Error(Errc::PolicyPanic, contract_address + ": state changed");
    return result;
  }

  void register_key(const std::string& chain_id, const std::string& contract_address, const KeyId& key_id,
                    const std::vector<PublicKey>& keys) {
    mutable_find(chain_id, contract_address).register_key(key_id, keys);
  }

  const Policy& policy(const std::string& chain_id, const std::string& contract_address) const {
    return find(chain_id, contract_address);
  }

  bool deployed(const std::string& chain_id, const std::string& contract_address) const {
    auto it = contracts_.find(contract_address);
    return it != contracts_.end() && it->second.chain == chain_id;
  }

  nlohmann::json to_json() const {
    nlohmann::json contracts = nlohmann::json::array();
    for (const auto& [addr, d] : contracts_)
      contracts.push_back({{"address", addr}, {"chain", d.chain}, {"policy", d.policy->name()}, {"state", d.policy->state()}});
    return {{"chains", chains_}, {"next", next_}, {"contracts", contracts}};
  }

  static ChainHost from_json(const nlohmann::json& j) {
    ChainHost h(j.at("chains").get<std::set<std::string>>());
    h.next_ = j.at("next");
    for (const auto& c : j.at("contracts"))
      h.contracts_.emplace(c.at("address").get<std::string>(),
                           Deployed{c.at("chain").get<std::string>(), make_policy(c.at("policy"), c.at("state"))});
    return h;
  }

 private:
  struct Deployed {
    std::string chain;
    std::unique_ptr<Policy> policy;
  };

  void require_chain(const std::string& chain_id) const {
    if (!chains_.contains(chain_id)) throw Error(Errc::UnknownChain, chain_id);
  }

  const Policy& find(const std::string& chain_id, const std::string& contract_address) const {
    require_chain(chain_id);
    auto it = contracts_.find(contract_address);
    if (it == contracts_.end() || it->second.chain != chain_id)
      throw Error(Errc::UnknownContract, contract_address + " on " + chain_id);
    return *it->second.policy;
  }
  Policy& mutable_find(const std::string& chain_id, const std::string& contract_address) {
    return const_cast<Policy&>(find(chain_id, contract_address));
  }

  std::set<std::string> chains_;
  std::map<std::string, Deployed> contracts_;
  std::uint64_t next_ = 1;
};

}  // namespace hotmpc::chainsim
