#pragma once

#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hotmpc/netharness/world.hpp"

// Scenario files: a world configuration, a scripted step timeline, and
// machine-checkable assertions over the final state.
//
//   {"name": ..., "description": ..., "world": {...WorldConfig...},
//    "steps": [{"op": ..., "expect": ...}, ...],
//    "assertions": [{"kind": ...}, ...],
//    "exit_with_last_outcome": false}
//
// String arguments may reference values bound by earlier steps via "$name".

namespace hotmpc::netharness {

struct Scenario {
  std::string name;
  std::string description;
  WorldConfig world;
  std::vector<nlohmann::json> steps;
  std::vector<nlohmann::json> assertions;
  bool exit_with_last_outcome = false;

  static Scenario parse(const nlohmann::json& j) {
    static const std::set<std::string> known{"name",  "description", "world",
                                             "steps", "assertions",  "exit_with_last_outcome"};
    if (!j.is_object()) throw Error(Errc::ConfigError, "scenario must be a JSON object");
    for (const auto& [k, _] : j.items())
      if (!known.contains(k)) throw Error(Errc::ConfigError, "unknown scenario field " + k);
    Scenario s;
    s.name = j.value("name", std::string("unnamed"));
    s.description = j.value("description", std::string());
    try {
      s.world = j.value("world", nlohmann::json::object()).get<WorldConfig>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::ConfigError, std::string("world: ") + e.what());
    }
    for (const auto& st : j.value("steps", nlohmann::json::array())) {
      if (!st.is_object() || !st.contains("op")) throw Error(Errc::ConfigError, "every step needs an op");
      s.steps.push_back(st);
    }
    for (const auto& a : j.value("assertions", nlohmann::json::array())) {
      if (!a.is_object() || !a.contains("kind")) throw Error(Errc::ConfigError, "every assertion needs a kind");
      s.assertions.push_back(a);
    }
    s.exit_with_last_outcome = j.value("exit_with_last_outcome", false);
    return s;
  }

  static Scenario parse_text(const std::string& text) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::ConfigError, e.what());
    }
    return parse(j);
  }
};

struct StepResult {
  std::size_t index = 0;
  std::string op;
  std::string outcome;  // "ok", an error code name, or a dispute verdict
  int exit_code = 0;
  std::optional<std::string> expected;
  bool matched = true;
  nlohmann::json output;

  nlohmann::json to_json() const {
    nlohmann::json j{{"index", index}, {"op", op}, {"outcome", outcome}, {"exit_code", exit_code}, {"matched", matched}};
    if (expected) j["expected"] = *expected;
    if (!output.is_null()) j["output"] = output;
    return j;
  }
};

struct AssertionResult {
  std::string kind;
  bool passed = false;
  std::string detail;
  nlohmann::json to_json() const { return {{"kind", kind}, {"passed", passed}, {"detail", detail}}; }
};

struct ScenarioResult {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<StepResult> steps;
  std::vector<AssertionResult> assertions;
  std::string transcript_hash;
  std::size_t transcript_lines = 0;
  bool passed = false;
  int exit_code = 0;

  std::vector<std::string> failures() const {
    std::vector<std::string> out;
    for (const auto& s : steps)
      if (!s.matched)
        out.push_back("step " + std::to_string(s.index) + " (" + s.op + "): expected " + s.expected.value_or("?") +
                      ", got " + s.outcome);
    for (const auto& a : assertions)
      if (!a.passed) out.push_back(a.kind + ": " + a.detail);
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json steps_j = nlohmann::json::array(), asserts_j = nlohmann::json::array();
    for (const auto& s : steps) steps_j.push_back(s.to_json());
    for (const auto& a : assertions) asserts_j.push_back(a.to_json());
    return {{"scenario", name},
            {"seed", seed},
            {"passed", passed},
            {"exit_code", exit_code},
            {"transcript_hash", transcript_hash},
            {"transcript_lines", transcript_lines},
            {"steps", steps_j},
            {"assertions", asserts_j},
            {"failures", failures()}};
  }
};

struct ScenarioRun {
  ScenarioResult result;
  World world;
};

namespace detail {

class Runner {
 public:
  Runner(const Scenario& s, World& w) : scenario_(s), world_(w) {}

  std::vector<StepResult> run_steps() {
    std::vector<StepResult> out;
    for (std::size_t i = 0; i < scenario_.steps.size(); ++i) {
      const auto& st = scenario_.steps[i];
      unsigned repeat = st.value("repeat", 1u);
      for (unsigned r = 0; r < repeat; ++r) {
        StepResult res{i, st.at("op").get<std::string>(), "ok", 0, std::nullopt, true, nullptr};
        if (st.contains("expect")) res.expected = st.at("expect").get<std::string>();
        try {
          res.output = execute(st, r);
          if (res.output.is_object() && res.output.contains("verdict")) res.outcome = res.output.at("verdict");
          if (res.output.is_object() && res.output.contains("error")) {
            res.outcome = res.output.at("error");
            res.exit_code = res.output.at("exit_code");
          }
        } catch (const nlohmann::json::exception& e) {
          throw Error(Errc::ConfigError, "step " + std::to_string(i) + ": " + e.what());
        } catch (const Error& e) {
          if (e.code() == Errc::ConfigError || e.code() == Errc::UnknownTarget) throw;
          res.outcome = to_string(e.code());
          res.exit_code = exit_code(e.code());
          res.output = {{"error", res.outcome}, {"detail", e.what()}};
        }
        if (res.expected) res.matched = *res.expected == res.outcome;
        last_exit_code_ = res.exit_code;
        out.push_back(std::move(res));
      }
    }
    return out;
  }

  std::vector<AssertionResult> check_assertions() {
    std::vector<AssertionResult> out;
    for (const auto& a : scenario_.assertions) {
      AssertionResult r{a.at("kind").get<std::string>(), false, ""};
      try {
        r.passed = check(a, r.detail);
      } catch (const Error& e) {
        if (e.code() == Errc::ConfigError) throw;
        r.passed = false;
        r.detail = e.what();
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ConfigError, "assertion " + r.kind + ": " + e.what());
      }
      out.push_back(std::move(r));
    }
    return out;
  }

  int last_exit_code() const { return last_exit_code_; }

 private:
  std::string str(const nlohmann::json& st, const char* key, std::optional<std::string> fallback = std::nullopt) const {
    if (!st.contains(key)) {
      if (fallback) return *fallback;
      throw Error(Errc::ConfigError, std::string("step is missing ") + key);
    }
    auto v = st.at(key).get<std::string>();
    if (!v.empty() && v[0] == '$') {
      auto it = vars_.find(v.substr(1));
      if (it == vars_.end()) throw Error(Errc::ConfigError, "unbound variable " + v);
      return it->second;
    }
    return v;
  }

  KeyId key_arg(const nlohmann::json& st) const { return KeyId::from_hex(str(st, "key")); }

  std::vector<std::string> targets(const nlohmann::json& st) const {
    if (st.contains("targets")) return st.at("targets").get<std::vector<std::string>>();
    return {str(st, "target")};
  }

  void bind(const nlohmann::json& st, const std::string& value) {
    if (st.contains("as")) vars_[st.at("as").get<std::string>()] = value;
  }

  nlohmann::json execute(const nlohmann::json& st, unsigned rep) {
    const auto op = st.at("op").get<std::string>();
    if (op == "deploy") {
      auto addr = world_.deploy(str(st, "chain", "near"), str(st, "policy"));
      bind(st, addr);
      return {{"contract", addr}};
    }
    if (op == "reserve") {
      auto [id, pk] = world_.reserve_key(str(st, "chain", "near"), str(st, "contract"));
      bind(st, id.hex());
      return {{"key_id", id}, {"public_key", pk}};
    }
    if (op == "register-owners") {
      world_.register_owners(key_arg(st), st.at("owners").get<std::vector<std::string>>());
      return {{"owners", st.at("owners")}};
    }
    if (op == "sign") {
      auto msg = str(st, "message");
      if (st.value("repeat", 1u) > 1) msg += "#" + std::to_string(rep);
      auto out = world_.sign(str(st, "gatekeeper", "gk-1"), key_arg(st), msg, str(st, "metadata", ""),
                             str(st, "chain", "bitcoin"), str(st, "scheme", std::string(kSchemeSchnorr)));
      return out.to_json();
    }
    if (op == "direct-access") {
      auto code = world_.direct_request(st.at("node").get<ParticipantId>(), key_arg(st), str(st, "message", "direct"));
      return {{"error", to_string(code)}, {"exit_code", exit_code(code)}};
    }
    if (op == "advance") {
      world_.advance(st.at("dt").get<SimTime>());
      return {{"clock", world_.now()}};
    }
    if (op == "fault") {
      for (const auto& t : targets(st)) world_.inject_fault(t, str(st, "fault"));
      return {{"targets", targets(st)}};
    }
    if (op == "heal") {
      for (const auto& t : targets(st)) world_.heal(t);
      return {{"targets", targets(st)}};
    }
    if (op == "health-check") {
      auto r = world_.health_check(str(st, "gatekeeper", "gk-1"));
      return {{"defectives", r.defectives}, {"rounds", r.rounds}, {"tests", r.tests}};
    }
    if (op == "dispute") {
      std::optional<econ::Amount> fee;
      if (st.contains("fee")) fee = st.at("fee").get<econ::Amount>();
      return world_.dispute(str(st, "fisherman", "fish"), str(st, "accused"),
                            econ::parse_predicate(str(st, "predicate")), st.at("evidence"), fee);
    }
    if (op == "epoch") {
      auto rec = world_.close_epoch();
      return {{"epoch", rec.epoch}, {"minted", rec.minted}, {"rewards", rec.rewards}};
    }
    if (op == "reshare") {
      return world_.reshare(st.at("participants").get<ParticipantList>(), st.at("threshold").get<unsigned>());
    }
    if (op == "snapshot-shares") {
      world_.snapshot_shares(str(st, "as"));
      return {{"label", str(st, "as")}};
    }
    if (op == "hijack") return hijack(str(st, "target"), st);
    throw Error(Errc::ConfigError, "unknown step op " + op);
  }

  // Attempts to change authorization state outside the contracts' rules.
  nlohmann::json hijack(const std::string& what, const nlohmann::json& st) {
    auto& ctrl = world_.mutable_controller();
    if (what == "rebind-owner") {
      world_.register_owners(key_arg(st), {str(st, "owner", "mallory")});
      return {{"rebound", true}};
    }
    if (what == "root-key") {
      Drbg rng(0xbad);
      auto ids = ctrl.fetch_config().participant_ids();
      auto fake = crypto::run_dkg<Group>(ctrl.fetch_config().threshold, ids, rng);
      ctrl.report_root_key(fake.begin()->second.public_package());
      return {{"replaced", true}};
    }
    if (what == "code-identity") {
      auto id = st.at("node").get<ParticipantId>();
      auto st2 = chainstate::AttestationStatement::make(id, sha256("patched-node"), world_.now(),
                                                        world_.node(id).enclave());
      ctrl.record_attestation(st2, world_.now());
      return {{"accepted", true}};
    }
    if (what == "enclave-mimic") {
      auto id = st.at("node").get<ParticipantId>();
      Drbg rng(0xbad);
      auto fake = KeyPair::generate(rng);
      ctrl.record_attestation(
          chainstate::AttestationStatement::make(id, ctrl.params().code_hash, world_.now(), fake), world_.now());
      return {{"accepted", true}};
    }
    if (what == "outsider-proposal") {
      auto cfg = ctrl.fetch_config();
      ctrl.propose_config(st.value("proposer", 99u), cfg.participants, cfg.threshold);
      return {{"accepted", true}};
    }
    throw Error(Errc::ConfigError, "unknown hijack target " + what);
  }

  static bool compare(const nlohmann::json& a, std::uint64_t value, std::string& detail) {
    detail = "value " + std::to_string(value);
    if (a.contains("equals")) return value == a.at("equals").get<std::uint64_t>();
    if (a.contains("at_least")) return value >= a.at("at_least").get<std::uint64_t>();
    if (a.contains("below")) return value < a.at("below").get<std::uint64_t>();
    throw Error(Errc::ConfigError, "assertion needs equals, at_least or below");
  }

  bool check(const nlohmann::json& a, std::string& detail) {
    const auto kind = a.at("kind").get<std::string>();
    const auto& ctrl = world_.controller();
    if (kind == "signatures") return compare(a, world_.signatures(), detail);
    if (kind == "signatures-verified") {
      std::size_t bad = 0;
      for (const auto& o : world_.outcomes()) bad += o.signature && !o.verified;
      detail = std::to_string(bad) + " signatures fail verification";
      return bad == 0 && world_.signatures() > 0;
    }
    if (kind == "last-exit-code") return compare(a, static_cast<std::uint64_t>(last_exit_code_), detail);
    if (kind == "blacklisted") {
      const auto& gk = world_.gatekeepers().at(a.value("gatekeeper", std::string("gk-1")));
      auto want = a.at("nodes").get<ParticipantList>();
      ParticipantList listed;
      for (const auto& [id, _] : gk.blacklist().entries()) listed.push_back(id);
      detail = "blacklist " + nlohmann::json(listed).dump();
      return std::all_of(want.begin(), want.end(),
                         [&](ParticipantId id) { return std::find(listed.begin(), listed.end(), id) != listed.end(); });
    }
    if (kind == "conservation") {
      const auto& l = world_.ledger();
      detail = "supply " + std::to_string(l.total_supply());
      return l.conserved();
    }
    if (kind == "mint-exact") {
      for (const auto& e : world_.epochs())
        if (e.supply_after != e.supply_before + e.inflation || e.minted != e.inflation) {
          detail = "epoch " + std::to_string(e.epoch) + " minted " + std::to_string(e.minted);
          return false;
        }
      detail = std::to_string(world_.epochs().size()) + " epochs";
      return !world_.epochs().empty();
    }
    if (kind == "slash-split-exact") {
      std::size_t n = 0;
      for (const auto& [_, d] : world_.disputes().all()) {
        if (!d.resolution) continue;
        const auto& s = d.resolution->split;
        if (s.fisherman + s.burned + s.treasury != s.slashed) {
          detail = "dispute " + std::to_string(d.id);
          return false;
        }
        n += s.slashed > 0;
      }
      detail = std::to_string(n) + " slashes";
      return n > 0;
    }
    if (kind == "gating-audit-clean") {
      std::size_t violations = 0;
      for (const auto& [_, n] : world_.nodes()) violations += node::audit_gating(n.log().entries()).size();
      detail = std::to_string(violations) + " violations";
      return violations == 0;
    }
    if (kind == "logs-verify") {
      for (const auto& [id, n] : world_.nodes())
        if (!node::verify_entries(n.log().entries(), n.enclave_public_key())) {
          detail = "log of node " + std::to_string(id);
          return false;
        }
      return true;
    }
    if (kind == "flow-steps") {
      std::set<unsigned> seen;
      for (const auto& line : world_.transcript().parsed())
        if (line.contains("step")) seen.insert(line.at("step").get<unsigned>());
      auto want = a.at("steps").get<std::vector<unsigned>>();
      detail = "seen " + nlohmann::json(seen).dump();
      return std::all_of(want.begin(), want.end(), [&](unsigned s) { return seen.contains(s); });
    }
    if (kind == "causality") {
      for (const auto& line : world_.transcript().parsed()) {
        const auto& d = line.at("detail");
        if (d.is_object() && d.contains("sent") && d.at("sent").get<SimTime>() > line.at("t").get<SimTime>()) {
          detail = "line " + line.at("seq").dump();
          return false;
        }
      }
      return true;
    }
    if (kind == "eligible") {
      auto id = a.at("node").get<ParticipantId>();
      bool want = a.at("equals").get<bool>();
      bool is = ctrl.is_eligible(id, world_.now());
      detail = std::string("eligible=") + (is ? "true" : "false");
      return is == want;
    }
    if (kind == "no-rounds-after-expiry") {
      auto id = a.at("node").get<ParticipantId>();
      const auto* rec = ctrl.fetch_config().find(id);
      if (!rec) throw Error(Errc::UnknownParticipant, "", id);
      SimTime expiry = rec->attestation_expiry;
      std::size_t late = 0;
      for (const auto& e : world_.node(id).log().entries()) {
        if (e.timestamp <= expiry) continue;
        auto* r = e.as<node::event::RoundStatus>();
        late += r && (r->status == node::kCommitmentSent || r->status == node::kShareEmitted);
      }
      for (const auto& line : world_.transcript().parsed()) {
        if (line.at("kind") != "deliver" || line.at("t").get<SimTime>() <= expiry) continue;
        const auto& d = line.at("detail");
        late += d.at("to").get<ParticipantId>() == id && d.at("session").get<std::string>().rfind("direct/", 0) != 0;
      }
      detail = std::to_string(late) + " protocol events after expiry " + std::to_string(expiry);
      return late == 0;
    }
    if (kind == "stake") return compare(a, world_.ledger().staked(a.at("account")), detail);
    if (kind == "balance") return compare(a, world_.ledger().balance(a.at("account")), detail);
    if (kind == "gatekeeper-active") {
      auto g = ctrl.gatekeeper(a.at("gatekeeper"));
      bool active = g && g->active;
      detail = std::string("active=") + (active ? "true" : "false");
      return active == a.at("equals").get<bool>();
    }
    if (kind == "dispute") {
      auto id = a.at("id").get<std::uint64_t>();
      const auto& d = world_.disputes().get(id);
      detail = d.resolution ? econ::to_string(d.resolution->verdict) : "open";
      return detail == a.at("verdict").get<std::string>();
    }
    if (kind == "reported-unavailable") {
      auto id = a.at("node").get<ParticipantId>();
      std::uint64_t count = 0;
      for (const auto& [pid, n] : world_.nodes())
        for (const auto& e : n.log().entries())
          if (auto* u = e.as<node::event::NodeUnavailable>(); u && u->peer == id) ++count;
      return compare(a, count, detail);
    }
    if (kind == "coalition-reconstructs") {
      // "nodes" take shares from "snapshot" when given, else current ones;
      // "current_nodes" always take current shares.
      ParticipantList ids;
      std::map<ParticipantId, KeyShare> shares;
      const std::map<ParticipantId, KeyShare>* snap =
          a.contains("snapshot") ? &world_.share_snapshot(a.at("snapshot")) : nullptr;
      for (auto id : a.at("nodes").get<ParticipantList>()) {
        ids.push_back(id);
        if (snap && snap->contains(id)) shares.emplace(id, snap->at(id));
        if (!snap && world_.node(id).key_share()) shares.emplace(id, *world_.node(id).key_share());
      }
      for (auto id : a.value("current_nodes", ParticipantList{})) {
        ids.push_back(id);
        if (world_.node(id).key_share()) shares.insert_or_assign(id, *world_.node(id).key_share());
      }
      bool want = a.at("equals").get<bool>();
      if (shares.size() != ids.size()) {
        detail = "some coalition members hold no share";
        return !want;
      }
      SecretScalar secret;
      for (const auto& [id, ks] : shares) secret += crypto::lagrange_coefficient<Group>(id, ids) * ks.share;
      bool matches = PublicKey::base_mul(secret) == ctrl.root_package()->group_public_key;
      detail = std::string("reconstructs=") + (matches ? "true" : "false");
      return matches == want;
    }
    if (kind == "share-erased") {
      auto id = a.at("node").get<ParticipantId>();
      detail = world_.node(id).key_share() ? "share present" : "share erased";
      return !world_.node(id).key_share();
    }
    if (kind == "group-key-unchanged") {
      return ctrl.root_package()->group_public_key == world_.genesis_public_key();
    }
    if (kind == "epoch") return compare(a, ctrl.epoch(), detail);
    if (kind == "participants") {
      auto have = ctrl.fetch_config().participant_ids();
      std::sort(have.begin(), have.end());
      detail = nlohmann::json(have).dump();
      return have == a.at("equals").get<ParticipantList>();
    }
    if (kind == "no-direct-access") {
      detail = std::to_string(world_.direct_attempts()) + " direct attempts";
      return !world_.direct_accepted() && world_.direct_attempts() > 0;
    }
    if (kind == "failovers") {
      std::uint64_t n = 0;
      for (const auto& o : world_.outcomes()) n += o.failed_over.size();
      return compare(a, n, detail);
    }
    throw Error(Errc::ConfigError, "unknown assertion kind " + kind);
  }

  const Scenario& scenario_;
  World& world_;
  std::map<std::string, std::string> vars_;
  int last_exit_code_ = 0;
};

}  // namespace detail

// Runs the scenario to completion. Step errors are outcomes, not failures;
// only configuration problems throw (ConfigError, UnknownTarget).
inline ScenarioRun run_scenario(const Scenario& scenario, std::optional<std::uint64_t> seed_override = std::nullopt) {
  auto cfg = scenario.world;
  if (seed_override) cfg.seed = *seed_override;
  ScenarioRun run{{}, World(cfg)};
  detail::Runner runner(scenario, run.world);
  auto& r = run.result;
  r.name = scenario.name;
  r.seed = cfg.seed;
  r.steps = runner.run_steps();
  r.assertions = runner.check_assertions();
  run.world.seal();
  r.transcript_hash = run.world.transcript().hash_hex();
  r.transcript_lines = run.world.transcript().size();
  r.passed = r.failures().empty();
  if (!r.passed)
    r.exit_code = exit_code(Errc::AssertionFailed);
  else
    r.exit_code = scenario.exit_with_last_outcome ? runner.last_exit_code() : 0;
  return run;
}

}  // namespace hotmpc::netharness
