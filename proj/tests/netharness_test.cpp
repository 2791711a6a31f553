#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "hotmpc/netharness/library.hpp"

using namespace hotmpc;
using namespace hotmpc::netharness;

namespace {

template <class F>
Errc error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::ConfigError;
}

std::string dump_failures(const ScenarioResult& r) {
  std::string out;
  for (const auto& f : r.failures()) out += f + "\n";
  return out;
}

// A world with a passkey wallet bound to alice.
struct Wallet {
  World world;
  KeyId key;
  explicit Wallet(WorldConfig cfg) : world(std::move(cfg)) {
    auto contract = world.deploy("near", "passkey");
    key = world.reserve_key("near", contract).first;
    world.register_owners(key, {"alice"});
  }
  SignOutcome sign(const std::string& msg, const std::string& gk = "gk-1") {
    return world.sign(gk, key, msg, "passkey:alice");
  }
};

}  // namespace

class LibraryScenario : public ::testing::TestWithParam<std::string> {};

TEST_P(LibraryScenario, PassesAllAssertions) {
  auto run = run_scenario(library_scenario(GetParam()));
  EXPECT_TRUE(run.result.passed) << dump_failures(run.result);
}

TEST_P(LibraryScenario, TranscriptIsDeterministic) {
  auto s = library_scenario(GetParam());
  auto a = run_scenario(s).result;
  auto b = run_scenario(s).result;
  EXPECT_EQ(a.transcript_hash, b.transcript_hash);
  EXPECT_EQ(a.transcript_lines, b.transcript_lines);
  auto c = run_scenario(s, s.world.seed + 1000).result;
  EXPECT_NE(a.transcript_hash, c.transcript_hash);
}

INSTANTIATE_TEST_SUITE_P(Bundled, LibraryScenario, ::testing::ValuesIn([] {
                           std::vector<std::string> names;
                           for (const auto& e : scenario_library()) names.emplace_back(e.name);
                           return names;
                         }()),
                         [](const auto& info) {
                           std::string n = info.param;
                           for (auto& c : n)
                             if (c == '-') c = '_';
                           return n;
                         });

TEST(Scenario, SubThresholdExitsWithUnavailableCode) {
  auto r = run_scenario(library_scenario("sub-threshold")).result;
  EXPECT_TRUE(r.passed) << dump_failures(r);
  EXPECT_EQ(r.exit_code, 3);
}

TEST(Scenario, FailedAssertionExitsFive) {
  auto s = library_scenario("happy-path");
  s.assertions = {{{"kind", "signatures"}, {"equals", 7}}};
  auto r = run_scenario(s).result;
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.exit_code, 5);
}

TEST(Scenario, UnexpectedOutcomeFails) {
  auto s = library_scenario("happy-path");
  s.steps[3]["expect"] = "Unauthorized";
  auto r = run_scenario(s).result;
  EXPECT_FALSE(r.passed);
  EXPECT_FALSE(r.steps[3].matched);
}

TEST(Scenario, ConfigErrors) {
  EXPECT_EQ(error_of([] { Scenario::parse_text("{not json"); }), Errc::ConfigError);
  EXPECT_EQ(error_of([] { Scenario::parse_text(R"({"bogus": 1})"); }), Errc::ConfigError);
  EXPECT_EQ(error_of([] { Scenario::parse_text(R"({"world": {"behaviors": {"1": "sleepy"}}})"); }),
            Errc::ConfigError);
  EXPECT_EQ(error_of([] { Scenario::parse_text(R"({"world": {"nodes": 3, "threshold": 4}})"); }), Errc::ConfigError);
  EXPECT_EQ(error_of([] { Scenario::parse_text(R"({"world": {"network": {"jitter": 4}}})"); }), Errc::ConfigError);
  EXPECT_EQ(error_of([] { library_scenario("no-such-scenario"); }), Errc::UnknownTarget);
  auto s = Scenario::parse_text(R"({"steps": [{"op": "teleport"}]})");
  EXPECT_EQ(error_of([&] { run_scenario(s); }), Errc::ConfigError);
  auto u = Scenario::parse_text(R"({"steps": [{"op": "sign", "key": "$nothing", "message": "m"}]})");
  EXPECT_EQ(error_of([&] { run_scenario(u); }), Errc::ConfigError);
  auto f = Scenario::parse_text(R"({"steps": [{"op": "fault", "target": "node-9", "fault": "offline"}]})");
  EXPECT_EQ(error_of([&] { run_scenario(f); }), Errc::UnknownTarget);
}

TEST(World, UnknownFaultTarget) {
  World w(WorldConfig{});
  EXPECT_EQ(error_of([&] { w.inject_fault("node-42", "offline"); }), Errc::UnknownTarget);
  EXPECT_EQ(error_of([&] { w.inject_fault("gk-9", "offline"); }), Errc::UnknownTarget);
  EXPECT_EQ(error_of([&] { w.inject_fault("mars", "offline"); }), Errc::UnknownTarget);
  EXPECT_EQ(error_of([&] { w.inject_fault("node-1", "levitate"); }), Errc::ConfigError);
}

TEST(World, PartitionBelowThresholdThenHeal) {
  Wallet w(WorldConfig{});
  for (auto t : {"node-1", "node-2", "node-3"}) w.world.inject_fault(t, "partition");
  auto blocked = w.sign("blocked");
  ASSERT_TRUE(blocked.error);
  EXPECT_EQ(*blocked.error, Errc::ThresholdUnavailable);
  EXPECT_EQ(blocked.exit_code(), 3);
  w.world.heal("all");
  auto ok = w.sign("after heal");
  EXPECT_FALSE(ok.error) << ok.detail;
  EXPECT_TRUE(ok.verified);
}

TEST(World, TwoOfFiveDownStillSigns) {
  Wallet w(WorldConfig{});
  w.world.inject_fault("node-4", "offline");
  w.world.inject_fault("node-5", "offline");
  auto out = w.sign("two down");
  EXPECT_FALSE(out.error) << out.detail;
  EXPECT_TRUE(out.verified);
  for (auto id : out.signers) EXPECT_LE(id, 3u);
}

TEST(World, AttestationLapseRemovesEligibility) {
  WorldConfig cfg;
  cfg.behaviors[2] = "stale-attestation";
  Wallet w(cfg);
  EXPECT_TRUE(w.world.controller().is_eligible(2, w.world.now()));
  w.world.advance(cfg.attestation_ttl + 1);
  EXPECT_FALSE(w.world.controller().is_eligible(2, w.world.now()));
  EXPECT_TRUE(w.world.controller().is_eligible(1, w.world.now()));
  auto out = w.sign("after lapse");
  EXPECT_FALSE(out.error) << out.detail;
  EXPECT_EQ(std::count(out.signers.begin(), out.signers.end(), 2u), 0);
}

TEST(World, ArrivalsNeverPrecedeSends) {
  WorldConfig cfg;
  cfg.network.latency_max = 5;
  cfg.network.timeout = 12;
  Wallet w(cfg);
  for (int i = 0; i < 5; ++i) w.sign("m" + std::to_string(i));
  std::size_t checked = 0;
  for (const auto& line : w.world.transcript().parsed()) {
    const auto& d = line.at("detail");
    if (d.is_object() && d.contains("sent")) {
      EXPECT_LE(d.at("sent").get<SimTime>(), line.at("t").get<SimTime>());
      ++checked;
    }
  }
  EXPECT_GT(checked, 0u);
}

TEST(World, LossyNetworkStaysConsistent) {
  WorldConfig cfg;
  cfg.network.drop_per_mille = 150;
  Wallet w(cfg);
  std::size_t ok = 0;
  for (int i = 0; i < 20; ++i) {
    auto out = w.sign("lossy " + std::to_string(i));
    if (!out.error) {
      EXPECT_TRUE(out.verified);
      ++ok;
    } else {
      EXPECT_TRUE(*out.error == Errc::ThresholdUnavailable || *out.error == Errc::DeadlineExpired)
          << to_string(*out.error);
    }
  }
  EXPECT_GT(ok, 0u);
  EXPECT_EQ(w.world.signatures(), ok);
}

TEST(World, JsonRoundTripContinuesIdentically) {
  Wallet a(WorldConfig{});
  a.sign("one");
  auto saved = a.world.to_json();
  auto b = World::from_json(nlohmann::json::parse(saved.dump()));
  EXPECT_EQ(b.to_json(), saved);
  auto oa = a.world.sign("gk-1", a.key, "two", "passkey:alice");
  auto ob = b.sign("gk-1", a.key, "two", "passkey:alice");
  EXPECT_FALSE(oa.error);
  EXPECT_EQ(oa.to_json(), ob.to_json());
  EXPECT_EQ(a.world.transcript().hash_hex(), b.transcript().hash_hex());
}

TEST(Scenario, ExportedFilesMatchLibrary) {
  for (const auto& e : scenario_library()) {
    std::ifstream in(std::string(HOTMPC_SOURCE_DIR) + "/scenarios/" + std::string(e.name) + ".json");
    ASSERT_TRUE(in) << e.name;
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(nlohmann::json::parse(ss.str()), nlohmann::json::parse(e.json)) << e.name;
  }
}
