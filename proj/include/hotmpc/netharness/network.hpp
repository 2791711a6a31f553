#pragma once

#include <json.hpp>
#include <optional>
#include <set>

#include "hotmpc/common/bytes.hpp"
#include "hotmpc/common/error.hpp"
#include "hotmpc/common/types.hpp"

// Star-shaped simulated network between the coordinating side (gatekeepers,
// chains) and the nodes. Each hop draws a latency from the seeded stream;
// offline and partitioned nodes are unreachable, and any hop may be dropped.

namespace hotmpc::netharness {

struct NetConfig {
  SimTime latency_min = 1;
  SimTime latency_max = 3;
  std::uint32_t drop_per_mille = 0;
  SimTime timeout = 10;
  friend bool operator==(const NetConfig&, const NetConfig&) = default;

  void validate() const {
    if (latency_min == 0 || latency_max < latency_min)
      throw Error(Errc::ConfigError, "latency bounds must satisfy 0 < min <= max");
    if (drop_per_mille > 1000) throw Error(Errc::ConfigError, "drop_per_mille above 1000");
    if (timeout < 2 * latency_max) throw Error(Errc::ConfigError, "timeout shorter than a round trip");
  }
};

inline void to_json(nlohmann::json& j, const NetConfig& c) {
  j = {{"latency_min", c.latency_min},
       {"latency_max", c.latency_max},
       {"drop_per_mille", c.drop_per_mille},
       {"timeout", c.timeout}};
}

inline void from_json(const nlohmann::json& j, NetConfig& c) {
  c = NetConfig{};
  for (const auto& [k, _] : j.items())
    if (k != "latency_min" && k != "latency_max" && k != "drop_per_mille" && k != "timeout")
      throw Error(Errc::ConfigError, "unknown network setting " + k);
  c.latency_min = j.value("latency_min", c.latency_min);
  c.latency_max = j.value("latency_max", c.latency_max);
  c.drop_per_mille = j.value("drop_per_mille", c.drop_per_mille);
  c.timeout = j.value("timeout", c.timeout);
  c.validate();
}

class SimNetwork {
 public:
  SimNetwork() = default;
  SimNetwork(NetConfig cfg, Drbg rng) : cfg_(cfg), rng_(std::move(rng)) { cfg_.validate(); }

  const NetConfig& config() const { return cfg_; }

  bool reachable(ParticipantId id) const { return !offline_.contains(id) && !isolated_.contains(id); }

  // One-way delivery delay, or nullopt when the message is lost.
  std::optional<SimTime> hop(ParticipantId to) {
    if (!reachable(to)) return std::nullopt;
    if (cfg_.drop_per_mille > 0 && rng_.uniform(0, 999) < cfg_.drop_per_mille) return std::nullopt;
    return rng_.uniform(cfg_.latency_min, cfg_.latency_max);
  }

  void set_offline(ParticipantId id, bool on) { on ? (void)offline_.insert(id) : (void)offline_.erase(id); }
  void set_isolated(ParticipantId id, bool on) { on ? (void)isolated_.insert(id) : (void)isolated_.erase(id); }
  void heal(ParticipantId id) {
    offline_.erase(id);
    isolated_.erase(id);
  }
  void heal_all() {
    offline_.clear();
    isolated_.clear();
  }
  const std::set<ParticipantId>& offline() const { return offline_; }
  const std::set<ParticipantId>& isolated() const { return isolated_; }

  nlohmann::json to_json() const {
    return {{"config", cfg_},
            {"rng_key", to_hex(rng_.key())},
            {"rng_counter", rng_.counter()},
            {"offline", offline_},
            {"isolated", isolated_}};
  }
  static SimNetwork from_json(const nlohmann::json& j) {
    auto key = array_from_hex<32>(j.at("rng_key").get<std::string>());
    if (!key) throw Error(Errc::InvalidEncoding, "network rng key");
    SimNetwork n(j.at("config").get<NetConfig>(), Drbg(*key, j.at("rng_counter").get<std::uint64_t>()));
    n.offline_ = j.at("offline").get<std::set<ParticipantId>>();
    n.isolated_ = j.at("isolated").get<std::set<ParticipantId>>();
    return n;
  }

 private:
  NetConfig cfg_;
  Drbg rng_;
  std::set<ParticipantId> offline_;
  std::set<ParticipantId> isolated_;
};

}  // namespace hotmpc::netharness
