#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "hotmpc/crypto/vectors.hpp"

using namespace hotmpc;

namespace {

nlohmann::json stored() {
  std::ifstream in(std::string(HOTMPC_SOURCE_DIR) + "/tests/vectors/crypto_vectors.json");
  std::stringstream ss;
  ss << in.rdbuf();
  return nlohmann::json::parse(ss.str());
}

std::uint32_t pow_mod(std::uint32_t b, std::uint32_t e, std::uint32_t m) {
  std::uint32_t r = 1;
  for (std::uint32_t i = 0; i < e; ++i) r = r * b % m;
  return r;
}

const nlohmann::json& group(const nlohmann::json& v, const std::string& name) {
  for (const auto& g : v.at("groups"))
    if (g.at("group") == name) return g;
  throw std::runtime_error("missing group " + name);
}

}  // namespace

TEST(Vectors, StoredFileIsReproduced) {
  auto bad = crypto::check_vectors(stored());
  for (const auto& b : bad) ADD_FAILURE() << b;
}

TEST(Vectors, TamperedFileIsDetected) {
  auto v = stored();
  auto& sig = v["groups"][0]["schnorr"]["signature"];
  auto s = sig.get<std::string>();
  s[0] = s[0] == '0' ? '1' : '0';
  sig = s;
  EXPECT_FALSE(crypto::check_vectors(v).empty());
}

TEST(Vectors, ToyDerivationExample) {
  auto v = stored().at("toy_derivation_example");
  EXPECT_EQ(v.at("root_public_key"), 12);
  EXPECT_EQ(v.at("tweak"), 3);
  EXPECT_EQ(v.at("child_public_key"), 12 * pow_mod(25, 3, 47) % 47);
  EXPECT_EQ(v.at("child_public_key"), 17);
}

// Recomputes the toy threshold vector by hand: line through the shares,
// secret at x = 0, public key 25^secret mod 47, and the Schnorr equation.
TEST(Vectors, ToyThresholdVectorMatchesHandOracle) {
  const auto v = stored();
  const auto& t = group(v, "toy23").at("threshold");
  ASSERT_EQ(t.at("threshold"), 2);
  auto share = [&](int i) { return std::stoul(t.at("shares").at(std::to_string(i)).get<std::string>(), nullptr, 16); };
  const long q = 23;
  long f1 = share(1), f2 = share(2), f3 = share(3);
  long slope = ((f2 - f1) % q + q) % q;
  EXPECT_EQ((f2 + slope) % q, f3);
  long secret = ((f1 - slope) % q + q) % q;
  auto pk = pow_mod(25, static_cast<std::uint32_t>(secret), 47);
  EXPECT_EQ(t.at("group_public_key").get<std::string>(), to_hex(ByteArray<1>{static_cast<std::uint8_t>(pk)}));

  auto sig = from_hex(t.at("signature").get<std::string>());
  ASSERT_TRUE(sig && sig->size() == 2);
  std::uint32_t R = (*sig)[0], z = (*sig)[1];
  auto msg = t.at("message").get<std::string>();
  auto c = crypto::challenge<crypto::ToyGroup>(crypto::Element<crypto::ToyGroup>::decode_or_throw(ByteArray<1>{(std::uint8_t)R}),
                                               crypto::Element<crypto::ToyGroup>::decode_or_throw(ByteArray<1>{(std::uint8_t)pk}),
                                               as_bytes(msg))
               .encode()[0];
  EXPECT_EQ(pow_mod(25, z, 47), R * pow_mod(pk, c, 47) % 47);
}

TEST(Vectors, EncodingWidths) {
  auto v = stored();
  const auto& r = group(v, "ristretto255");
  EXPECT_EQ(r.at("scalar_bytes"), 32);
  EXPECT_EQ(r.at("element_bytes"), 32);
  EXPECT_EQ(r.at("signature_bytes"), 64);
  for (const auto& e : r.at("encodings")) {
    EXPECT_EQ(e.at("scalar").get<std::string>().size(), 64u);
    EXPECT_EQ(e.at("k_times_base").get<std::string>().size(), 64u);
  }
  // Ristretto255 base point and identity have fixed canonical encodings.
  EXPECT_EQ(r.at("encodings")[0].at("k_times_base"), std::string(64, '0'));
  EXPECT_EQ(r.at("encodings")[1].at("k_times_base"),
            "e2f2ae0a6abc4e71a884a961c500515f58e30b6aa582dd8db6a65945e08d2d76");
  EXPECT_EQ(r.at("encodings")[1].at("scalar"), "01" + std::string(62, '0'));
}
