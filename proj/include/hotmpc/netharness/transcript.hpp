#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "hotmpc/common/bytes.hpp"
#include "hotmpc/common/types.hpp"

// Ordered record of everything the harness observed. Each line is a compact
// JSON object; the running hash chains H(prev || line) so two transcripts
// agree on the hash exactly when they agree byte for byte.

namespace hotmpc::netharness {

class Transcript {
 public:
  // `step` tags lines that belong to the signing flow (1 request to the
  // gatekeeper, 2 gatekeeper to nodes, 3 controller read, 4 registry lookup,
  // 5 hot_verify, 6 signature generation).
  void record(SimTime t, std::string kind, nlohmann::json detail, std::optional<unsigned> step = std::nullopt) {
    nlohmann::json line{{"seq", lines_.size()}, {"t", t}, {"kind", std::move(kind)}, {"detail", std::move(detail)}};
    if (step) line["step"] = *step;
    auto text = line.dump();
    hash_ = sha256(ByteWriter().raw(hash_).str(text).bytes());
    lines_.push_back(std::move(text));
  }

  const std::vector<std::string>& lines() const { return lines_; }
  std::size_t size() const { return lines_.size(); }
  std::string hash_hex() const { return to_hex(hash_); }

  std::string jsonl() const {
    std::string out;
    for (const auto& l : lines_) out += l + "\n";
    return out;
  }

  std::vector<nlohmann::json> parsed() const {
    std::vector<nlohmann::json> out;
    out.reserve(lines_.size());
    for (const auto& l : lines_) out.push_back(nlohmann::json::parse(l));
    return out;
  }

  nlohmann::json to_json() const { return {{"lines", lines_}, {"hash", to_hex(hash_)}}; }
  static Transcript from_json(const nlohmann::json& j) {
    Transcript t;
    t.lines_ = j.at("lines").get<std::vector<std::string>>();
    auto h = array_from_hex<32>(j.at("hash").get<std::string>());
    if (!h) throw Error(Errc::InvalidEncoding, "transcript hash");
    t.hash_ = *h;
    return t;
  }

 private:
  std::vector<std::string> lines_;
  Digest32 hash_{};
};

}  // namespace hotmpc::netharness
