#pragma once

#include <algorithm>
#include <functional>
#include <json.hpp>
#include <map>
#include <set>
#include <vector>

#include "hotmpc/common/bytes.hpp"
#include "hotmpc/common/types.hpp"

namespace hotmpc::gatekeeper {

// Fixed-window counter: at most `capacity` admissions per window of length
// `window`, windows aligned to multiples of `window`.
class FixedWindowQuota {
 public:
  FixedWindowQuota(std::uint32_t capacity = 1, SimTime window = 100) : capacity_(capacity), window_(window) {
    if (capacity_ == 0 || window_ == 0) throw Error(Errc::ConfigError, "quota capacity and window must be positive");
  }

  bool would_admit(SimTime now) const { return current(now) < capacity_; }

  bool try_admit(SimTime now) {
    roll(now);
    if (used_ >= capacity_) return false;
    ++used_;
    return true;
  }

  // Counts without enforcing; used by a gatekeeper that ignores its lease.
  void force_admit(SimTime now) {
    roll(now);
    ++used_;
  }

  std::uint32_t used(SimTime now) const { return current(now); }
  std::uint32_t capacity() const { return capacity_; }
  SimTime window() const { return window_; }

  nlohmann::json to_json() const {
    return {{"capacity", capacity_}, {"window", window_}, {"index", index_}, {"used", used_}};
  }
  static FixedWindowQuota from_json(const nlohmann::json& j) {
    FixedWindowQuota q(j.at("capacity"), j.at("window"));
    q.index_ = j.at("index");
    q.used_ = j.at("used");
    return q;
  }

 private:
  std::uint32_t current(SimTime now) const { return now / window_ == index_ ? used_ : 0; }
  void roll(SimTime now) {
    if (now / window_ != index_) {
      index_ = now / window_;
      used_ = 0;
    }
  }

  std::uint32_t capacity_;
  SimTime window_;
  SimTime index_ = 0;
  std::uint32_t used_ = 0;
};

class Blacklist {
 public:
  void add(ParticipantId id, SimTime until) { until_[id] = std::max(until_[id], until); }
  void remove(ParticipantId id) { until_.erase(id); }
  bool contains(ParticipantId id, SimTime now) const {
    auto it = until_.find(id);
    return it != until_.end() && now < it->second;
  }
  ParticipantList active(SimTime now) const {
    ParticipantList out;
    for (const auto& [id, until] : until_)
      if (now < until) out.push_back(id);
    return out;
  }
  const std::map<ParticipantId, SimTime>& entries() const { return until_; }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [id, until] : until_) j[std::to_string(id)] = until;
    return j;
  }
  static Blacklist from_json(const nlohmann::json& j) {
    Blacklist b;
    for (const auto& [k, v] : j.items()) b.until_[static_cast<ParticipantId>(std::stoul(k))] = v.get<SimTime>();
    return b;
  }

 private:
  std::map<ParticipantId, SimTime> until_;
};

// Exponentially weighted mean of observed round latencies, decay 0.5 per
// observation. Unobserved nodes score 0 (optimistic).
class ResponsivenessScores {
 public:
  explicit ResponsivenessScores(double decay = 0.5) : decay_(decay) {}

  void observe(ParticipantId id, double latency) {
    auto it = scores_.find(id);
    if (it == scores_.end())
      scores_.emplace(id, latency);
    else
      it->second = decay_ * it->second + (1.0 - decay_) * latency;
  }
  double score(ParticipantId id) const {
    auto it = scores_.find(id);
    return it == scores_.end() ? 0.0 : it->second;
  }
  const std::map<ParticipantId, double>& all() const { return scores_; }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [id, s] : scores_) j[std::to_string(id)] = s;
    return {{"decay", decay_}, {"scores", j}};
  }
  static ResponsivenessScores from_json(const nlohmann::json& j) {
    ResponsivenessScores r(j.at("decay").get<double>());
    for (const auto& [k, v] : j.at("scores").items())
      r.scores_[static_cast<ParticipantId>(std::stoul(k))] = v.get<double>();
    return r;
  }

 private:
  double decay_;
  std::map<ParticipantId, double> scores_;
};

// Lowest score first; equal scores ordered by a seeded hash of the id so the
// choice is deterministic yet spreads load across seeds.
inline ParticipantList select_signers(const ParticipantList& eligible, unsigned threshold,
                                      const ResponsivenessScores& scores, const Blacklist& blacklist, SimTime now,
                                      std::uint64_t seed) {
  ParticipantList pool;
  for (auto id : eligible)
    if (!blacklist.contains(id, now)) pool.push_back(id);
  if (threshold == 0 || pool.size() < threshold)
    throw Error(Errc::ThresholdUnavailable,
                std::to_string(pool.size()) + " eligible nodes for threshold " + std::to_string(threshold));
  auto tie = [seed](ParticipantId id) { return sha256(ByteWriter().u64(seed).u32(id).bytes()); };
  std::stable_sort(pool.begin(), pool.end(), [&](ParticipantId a, ParticipantId b) {
    double sa = scores.score(a), sb = scores.score(b);
    if (sa != sb) return sa < sb;
    return tie(a) < tie(b);
  });
  pool.resize(threshold);
  std::sort(pool.begin(), pool.end());
  return pool;
}

struct GroupTestResult {
  ParticipantList defectives;
  unsigned rounds = 0;  // split levels after the initial pooled test
  unsigned tests = 0;
};

// Adaptive binary splitting. `probe(set)` is true when every member of the
// set responds. Tests within one level are independent and count as one
// round.
inline GroupTestResult group_test(const ParticipantList& candidates,
                                  const std::function<bool(const ParticipantList&)>& probe) {
  GroupTestResult out;
  if (candidates.empty()) return out;
  ++out.tests;
  if (probe(candidates)) return out;
  std::vector<ParticipantList> failing{candidates};
  while (!failing.empty()) {
    std::vector<ParticipantList> next;
    bool split = false;
    for (const auto& set : failing) {
      if (set.size() == 1) {
        out.defectives.push_back(set.front());
        continue;
      }
      split = true;
      auto mid = set.begin() + static_cast<std::ptrdiff_t>(set.size() / 2);
      for (ParticipantList half : {ParticipantList(set.begin(), mid), ParticipantList(mid, set.end())}) {
        ++out.tests;
        if (!probe(half)) next.push_back(std::move(half));
      }
    }
    if (split) ++out.rounds;
    failing = std::move(next);
  }
  std::sort(out.defectives.begin(), out.defectives.end());
  return out;
}

}  // namespace hotmpc::gatekeeper
