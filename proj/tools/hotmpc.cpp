#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hotmpc/crypto/vectors.hpp"
#include "hotmpc/netharness/library.hpp"

using namespace hotmpc;
using netharness::Scenario;
using netharness::World;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string state_dir = ".hotmpc";
  std::string output = "json";
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ConfigError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::ConfigError, "cannot write " + path.string());
    out << text;
  }
  fs::rename(tmp, path);
}

nlohmann::json parse_json(const std::string& text, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ConfigError, what + ": " + e.what());
  }
}

class Cli {
 public:
  explicit Cli(Globals& g) : g_(g) {}

  void emit(const nlohmann::json& j) const { std::cout << (g_.output == "pretty" ? j.dump(2) : j.dump()) << "\n"; }

  fs::path state_file() const { return fs::path(g_.state_dir) / "world.json"; }

  World load() const {
    if (!fs::exists(state_file()))
      throw Error(Errc::ConfigError, "no state in " + g_.state_dir + "; run `hotmpc init` first");
    return World::from_json(parse_json(read_file(state_file().string()), state_file().string()));
  }

  void save(const World& w) const { write_file(state_file(), w.to_json().dump() + "\n"); }

  netharness::WorldConfig world_config() const {
    netharness::WorldConfig cfg;
    if (!g_.config.empty()) {
      try {
        cfg = parse_json(read_file(g_.config), g_.config).get<netharness::WorldConfig>();
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ConfigError, g_.config + ": " + e.what());
      }
    }
    if (g_.seed) cfg.seed = *g_.seed;
    return cfg;
  }

 private:
  Globals& g_;
};

ParticipantList parse_ids(const std::vector<std::string>& items) {
  ParticipantList out;
  for (const auto& s : items) {
    try {
      std::size_t pos = 0;
      auto v = std::stoul(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      out.push_back(static_cast<ParticipantId>(v));
    } catch (const std::exception&) {
      throw Error(Errc::ConfigError, "not a participant id: " + s);
    }
  }
  return out;
}

nlohmann::json evidence_arg(const std::string& s) {
  if (!s.empty() && s[0] == '@') return parse_json(read_file(s.substr(1)), s.substr(1));
  return s;
}

Scenario load_scenario(const std::string& name_or_file) {
  if (fs::exists(name_or_file)) return netharness::Scenario::parse_text(read_file(name_or_file));
  return netharness::library_scenario(name_or_file);
}

}  // namespace

int main(int argc, char** argv) {
  Globals g;
  Cli cli(g);
  CLI::App app{"threshold MPC key management simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", g.config, "world configuration JSON (init)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "seed override for init and scenario runs");
  app.add_option("--state-dir", g.state_dir, "directory holding the world snapshot")->capture_default_str();
  app.add_option("--output", g.output, "stdout format")->check(CLI::IsMember({"json", "pretty"}))->capture_default_str();

  int code = 0;
  std::function<void()> action;

  auto* init = app.add_subcommand("init", "genesis: register nodes, run DKG, fund and stake accounts");
  init->callback([&] {
    action = [&] {
      World w(cli.world_config());
      cli.save(w);
      const auto& c = w.controller();
      nlohmann::json gks = nlohmann::json::array();
      for (const auto& [id, _] : w.gatekeepers()) gks.push_back(id);
      cli.emit({{"root_public_key", c.root_package()->group_public_key},
                {"participants", c.fetch_config().participant_ids()},
                {"threshold", c.fetch_config().threshold},
                {"gatekeepers", gks},
                {"seed", w.config().seed}});
    };
  });

  std::string chain = "near", policy, contract;
  auto* deploy = app.add_subcommand("deploy", "deploy an authorization policy contract");
  deploy->add_option("--chain", chain)->capture_default_str();
  deploy->add_option("--policy", policy)->required();
  deploy->callback([&] {
    action = [&] {
      auto w = cli.load();
      auto addr = w.deploy(chain, policy);
      cli.save(w);
      cli.emit({{"chain", chain}, {"contract", addr}});
    };
  });

  auto* reserve = app.add_subcommand("reserve-key", "reserve a key_id for a contract and print its public key");
  reserve->add_option("--chain", chain)->capture_default_str();
  reserve->add_option("--contract", contract)->required();
  reserve->callback([&] {
    action = [&] {
      auto w = cli.load();
      auto [id, pk] = w.reserve_key(chain, contract);
      cli.save(w);
      cli.emit({{"key_id", id}, {"public_key", pk}});
    };
  });

  std::string owner, key_hex, message, metadata, gatekeeper_id = "gk-1", target_chain = "bitcoin",
                                               scheme = std::string(kSchemeSchnorr), signature_hex;
  std::vector<std::string> owners;
  auto* passkey = app.add_subcommand("passkey", "simulated passkeys held by users");
  passkey->require_subcommand(1);
  auto* pk_gen = passkey->add_subcommand("keygen", "create (or show) the passkey of an owner");
  pk_gen->add_option("--owner", owner)->required();
  pk_gen->callback([&] {
    action = [&] {
      auto w = cli.load();
      auto pk = w.passkey(owner).public_key;
      cli.save(w);
      cli.emit({{"owner", owner}, {"public_key", pk}});
    };
  });
  auto* pk_reg = passkey->add_subcommand("register", "bind owners' passkeys to a key_id in its contract");
  pk_reg->add_option("--key-id", key_hex)->required();
  pk_reg->add_option("--owner", owners)->required();
  pk_reg->callback([&] {
    action = [&] {
      auto w = cli.load();
      w.register_owners(KeyId::from_hex(key_hex), owners);
      cli.save(w);
      cli.emit({{"key_id", key_hex}, {"owners", owners}});
    };
  });
  auto* pk_sign = passkey->add_subcommand("sign", "produce authorization metadata for a message");
  pk_sign->add_option("--owner", owner)->required();
  pk_sign->add_option("--message", message)->required();
  pk_sign->callback([&] {
    action = [&] {
      auto w = cli.load();
      auto meta = w.metadata_for("passkey:" + owner, sha256(message));
      cli.save(w);
      cli.emit({{"owner", owner}, {"metadata", "hex:" + to_hex(meta)}});
    };
  });

  auto* sign = app.add_subcommand("sign", "request a signature through a gatekeeper");
  sign->add_option("--key-id", key_hex)->required();
  sign->add_option("--message", message)->required();
  sign->add_option("--metadata", metadata, "passkey:OWNER, multi:A,B, hex:BYTES or forged");
  sign->add_option("--gatekeeper", gatekeeper_id)->capture_default_str();
  sign->add_option("--target-chain", target_chain)->capture_default_str();
  sign->add_option("--scheme", scheme)->capture_default_str();
  sign->callback([&] {
    action = [&] {
      auto w = cli.load();
      auto out = w.sign(gatekeeper_id, KeyId::from_hex(key_hex), message, metadata, target_chain, scheme);
      cli.save(w);
      cli.emit(out.to_json());
      code = out.exit_code();
    };
  });

  auto* verify = app.add_subcommand("verify", "check a signature under the key_id's derived public key");
  verify->add_option("--key-id", key_hex)->required();
  verify->add_option("--message", message)->required();
  verify->add_option("--signature", signature_hex)->required();
  verify->callback([&] {
    action = [&] {
      auto w = cli.load();
      auto id = KeyId::from_hex(key_hex);
      auto pk = crypto::derive_child_public(w.controller().root_package()->group_public_key, id);
      auto sig = from_hex(signature_hex);
      auto digest = sha256(message);
      bool ok = sig && crypto::verify<Group>(digest, *sig, pk);
      cli.emit({{"key_id", id}, {"public_key", pk}, {"valid", ok}});
      if (!ok) code = exit_code(Errc::BadSignature);
    };
  });

  std::vector<std::string> participants;
  unsigned threshold = 0;
  auto* reshare = app.add_subcommand("reshare", "vote in a new participant set and reshare the root key");
  reshare->add_option("--participants", participants, "new participant ids")->required()->delimiter(',');
  reshare->add_option("--threshold", threshold)->required();
  reshare->callback([&] {
    action = [&] {
      auto w = cli.load();
      auto out = w.reshare(parse_ids(participants), threshold);
      cli.save(w);
      cli.emit(out);
    };
  });

  SimTime dt = 0;
  auto* advance = app.add_subcommand("advance", "advance simulated time (nodes re-attest on schedule)");
  advance->add_option("--dt", dt)->required();
  advance->callback([&] {
    action = [&] {
      auto w = cli.load();
      w.advance(dt);
      cli.save(w);
      cli.emit({{"clock", w.now()}});
    };
  });

  std::string target, fault;
  auto* fault_cmd = app.add_subcommand("fault", "inject a fault into a node or gatekeeper");
  fault_cmd->add_option("--target", target, "node-N or a gatekeeper id")->required();
  fault_cmd->add_option("--fault", fault, "offline, partition, behavior:MODE or ignore-quota")->required();
  fault_cmd->callback([&] {
    action = [&] {
      auto w = cli.load();
      w.inject_fault(target, fault);
      cli.save(w);
      cli.emit({{"target", target}, {"fault", fault}});
    };
  });
  auto* heal = app.add_subcommand("heal", "clear faults on a target, or on everything with `all`");
  heal->add_option("--target", target)->required();
  heal->callback([&] {
    action = [&] {
      auto w = cli.load();
      w.heal(target);
      cli.save(w);
      cli.emit({{"healed", target}});
    };
  });

  auto* epoch = app.add_subcommand("epoch", "close the epoch: mint rewards and collect lease fees");
  epoch->callback([&] {
    action = [&] {
      auto w = cli.load();
      auto rec = w.close_epoch();
      cli.save(w);
      cli.emit({{"epoch", rec.epoch},
                {"minted", rec.minted},
                {"supply_before", rec.supply_before},
                {"supply_after", rec.supply_after},
                {"rewards", rec.rewards}});
    };
  });

  std::string fisherman = "fish", accused, predicate, evidence;
  std::optional<econ::Amount> fee;
  auto* dispute = app.add_subcommand("dispute", "open and resolve a dispute against a staked actor");
  dispute->add_option("--fisherman", fisherman)->capture_default_str();
  dispute->add_option("--accused", accused)->required();
  dispute->add_option("--predicate", predicate, "receipt-beyond-quota, signing-without-validation or unavailability-streak")
      ->required();
  dispute->add_option("--evidence", evidence, "receipts, log, tampered-log, peer-logs or @FILE")->required();
  dispute->add_option("--fee", fee);
  dispute->callback([&] {
    action = [&] {
      auto w = cli.load();
      auto out = w.dispute(fisherman, accused, econ::parse_predicate(predicate), evidence_arg(evidence), fee);
      cli.save(w);
      cli.emit(out);
    };
  });

  std::optional<ParticipantId> log_node;
  std::string out_path;
  auto* export_log = app.add_subcommand("export-log", "print a node's signed log, or the harness transcript, as JSON lines");
  auto* log_node_opt = export_log->add_option("--node", log_node);
  export_log->add_flag("--transcript", "export the transcript instead")->excludes(log_node_opt);
  export_log->add_option("--out", out_path, "write to a file instead of stdout");
  export_log->callback([&] {
    action = [&] {
      auto w = cli.load();
      std::string text;
      if (log_node)
        text = node::export_jsonl(w.node(*log_node).export_log());
      else if (export_log->count("--transcript"))
        text = w.transcript().jsonl();
      else
        throw Error(Errc::ConfigError, "export-log needs --node or --transcript");
      if (out_path.empty()) {
        std::cout << text;
      } else {
        write_file(out_path, text);
        cli.emit({{"written", out_path}});
      }
    };
  });

  auto* receipts = app.add_subcommand("receipts", "list the receipts a gatekeeper has issued");
  receipts->add_option("--gatekeeper", gatekeeper_id)->capture_default_str();
  receipts->callback([&] {
    action = [&] {
      auto w = cli.load();
      auto it = w.gatekeepers().find(gatekeeper_id);
      if (it == w.gatekeepers().end()) throw Error(Errc::UnknownTarget, gatekeeper_id);
      cli.emit({{"gatekeeper", gatekeeper_id}, {"receipts", it->second.receipt_log()}});
    };
  });

  std::string scenario_arg, transcript_out, export_dir = "scenarios";
  auto* scenario = app.add_subcommand("scenario", "bundled and file-based threat scenarios");
  scenario->require_subcommand(1);
  auto* sc_list = scenario->add_subcommand("list", "list bundled scenarios");
  sc_list->callback([&] {
    action = [&] {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& e : netharness::scenario_library()) {
        auto s = netharness::library_scenario(e.name);
        arr.push_back({{"name", s.name}, {"description", s.description}});
      }
      cli.emit(arr);
    };
  });
  auto* sc_run = scenario->add_subcommand("run", "run a bundled scenario by name, or a scenario file");
  sc_run->add_option("scenario", scenario_arg)->required();
  sc_run->add_option("--transcript-out", transcript_out, "write the transcript as JSON lines");
  sc_run->callback([&] {
    action = [&] {
      auto run = netharness::run_scenario(load_scenario(scenario_arg), g.seed);
      if (!transcript_out.empty()) write_file(transcript_out, run.world.transcript().jsonl());
      cli.emit(run.result.to_json());
      for (const auto& f : run.result.failures()) std::cerr << "FAIL " << f << "\n";
      code = run.result.exit_code;
    };
  });
  auto* sc_export = scenario->add_subcommand("export", "write the bundled scenarios as JSON files");
  sc_export->add_option("--dir", export_dir)->capture_default_str();
  sc_export->callback([&] {
    action = [&] {
      nlohmann::json written = nlohmann::json::array();
      for (const auto& e : netharness::scenario_library()) {
        auto path = fs::path(export_dir) / (std::string(e.name) + ".json");
        write_file(path, nlohmann::json::parse(e.json).dump(2) + "\n");
        written.push_back(path.string());
      }
      cli.emit({{"written", written}});
    };
  });

  auto* policy_cmd = app.add_subcommand("policy", "authorization policies");
  policy_cmd->require_subcommand(1);
  auto* pol_list = policy_cmd->add_subcommand("list", "list built-in policies");
  pol_list->callback([&] {
    action = [&] {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& p : chainsim::policy_catalog()) arr.push_back({{"name", p.name}, {"description", p.description}});
      cli.emit(arr);
    };
  });

  std::string check_path;
  std::uint64_t vector_seed = 1;
  auto* vectors = app.add_subcommand("vectors", "emit or check known-answer crypto vectors");
  vectors->add_option("--out", out_path, "write vectors to a file");
  vectors->add_option("--check", check_path, "compare a stored vector file against this build");
  vectors->add_option("--vector-seed", vector_seed)->capture_default_str();
  vectors->callback([&] {
    action = [&] {
      if (!check_path.empty()) {
        auto bad = crypto::check_vectors(parse_json(read_file(check_path), check_path));
        cli.emit({{"file", check_path}, {"ok", bad.empty()}, {"mismatches", bad}});
        if (!bad.empty()) code = exit_code(Errc::AssertionFailed);
        return;
      }
      auto v = crypto::generate_vectors(vector_seed);
      if (out_path.empty()) {
        cli.emit(v);
      } else {
        write_file(out_path, v.dump(2) + "\n");
        cli.emit({{"written", out_path}});
      }
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  try {
    if (action) action();
  } catch (const Error& e) {
    cli.emit({{"error", to_string(e.code())}, {"detail", e.what()}});
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    cli.emit({{"error", "Internal"}, {"detail", e.what()}});
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return code;
}
