#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mter/checkpoint.hpp"
#include "testutil.hpp"

using namespace mter;

namespace {

Checkpoint make_checkpoint(std::uint64_t seed = 7) {
  Checkpoint ckpt;
  ckpt.model = init_model({3, 2, 2, 2}, 4, 5, 3, 4, seed, 0.5);
  for (int u = 0; u < 4; ++u) ckpt.users.intern("user" + std::to_string(u));
  for (int i = 0; i < 5; ++i) ckpt.items.intern("item" + std::to_string(i));
  for (int f = 0; f < 3; ++f) ckpt.features.intern("feat" + std::to_string(f));
  for (int o = 0; o < 4; ++o) ckpt.opinions.intern("op" + std::to_string(o));
  ckpt.rating_scale = 5;
  ckpt.config.seed = seed;
  ckpt.config.dims = {3, 2, 2, 2};
  return ckpt;
}

}  // namespace

TEST_CASE("checkpoint round-trip is bitwise identical") {
  testutil::TempDir tmp;
  auto ckpt = make_checkpoint();
  save_checkpoint(ckpt, tmp.path().string());
  auto loaded = load_checkpoint(tmp.path().string());

  CHECK(loaded.model.user_factors.data() == ckpt.model.user_factors.data());
  CHECK(loaded.model.item_factors.data() == ckpt.model.item_factors.data());
  CHECK(loaded.model.feature_factors.data() == ckpt.model.feature_factors.data());
  CHECK(loaded.model.opinion_factors.data() == ckpt.model.opinion_factors.data());
  CHECK(loaded.model.core_x.data() == ckpt.model.core_x.data());
  CHECK(loaded.model.core_yu.data() == ckpt.model.core_yu.data());
  CHECK(loaded.model.core_yi.data() == ckpt.model.core_yi.data());
  CHECK(loaded.users.externals() == ckpt.users.externals());
  CHECK(loaded.opinions.externals() == ckpt.opinions.externals());
  CHECK(loaded.rating_scale == 5);
  CHECK(loaded.config.seed == ckpt.config.seed);
  CHECK(loaded.config.dims.a == 3);
}

TEST_CASE("saving twice produces byte-identical files") {
  testutil::TempDir d1, d2;
  auto ckpt = make_checkpoint();
  save_checkpoint(ckpt, d1.path().string());
  save_checkpoint(ckpt, d2.path().string());
  for (const char* name : {"manifest.json", "U.bin", "I.bin", "F.bin", "f_dummy.bin", "O.bin",
                           "G1.bin", "G2.bin", "G3.bin"})
    CHECK(testutil::read_file(d1.path() / name) == testutil::read_file(d2.path() / name));
}

TEST_CASE("truncated array file is rejected with the array name") {
  testutil::TempDir tmp;
  save_checkpoint(make_checkpoint(), tmp.path().string());
  std::filesystem::resize_file(tmp.path() / "I.bin", 8);
  CHECK_THROWS_WITH_AS(load_checkpoint(tmp.path().string()), doctest::Contains("I"),
                       std::runtime_error);
}

TEST_CASE("missing manifest is rejected") {
  testutil::TempDir tmp;
  save_checkpoint(make_checkpoint(), tmp.path().string());
  std::filesystem::remove(tmp.path() / "manifest.json");
  CHECK_THROWS_WITH_AS(load_checkpoint(tmp.path().string()), doctest::Contains("manifest"),
                       std::runtime_error);
}

TEST_CASE("unknown version is rejected") {
  testutil::TempDir tmp;
  save_checkpoint(make_checkpoint(), tmp.path().string());
  auto manifest = testutil::read_file(tmp.path() / "manifest.json");
  auto pos = manifest.find("\"version\": 1");
  REQUIRE(pos != std::string::npos);
  manifest.replace(pos, 12, "\"version\": 999");
  std::ofstream(tmp.path() / "manifest.json") << manifest;
  CHECK_THROWS_WITH_AS(load_checkpoint(tmp.path().string()), doctest::Contains("version"),
                       std::runtime_error);
}

TEST_CASE("negative parameter values are rejected") {
  testutil::TempDir tmp;
  save_checkpoint(make_checkpoint(), tmp.path().string());
  const double bad = -0.5;
  std::fstream f(tmp.path() / "U.bin", std::ios::in | std::ios::out | std::ios::binary);
  f.write(reinterpret_cast<const char*>(&bad), sizeof(bad));
  f.close();
  CHECK_THROWS_WITH_AS(load_checkpoint(tmp.path().string()), doctest::Contains("non-negativity"),
                       std::runtime_error);
}

TEST_CASE("manifest shape mismatch is rejected") {
  testutil::TempDir tmp;
  save_checkpoint(make_checkpoint(), tmp.path().string());
  auto manifest = testutil::read_file(tmp.path() / "manifest.json");
  auto pos = manifest.find("\"m\": 4");
  REQUIRE(pos != std::string::npos);
  manifest.replace(pos, 6, "\"m\": 9");
  std::ofstream(tmp.path() / "manifest.json") << manifest;
  CHECK_THROWS_AS(load_checkpoint(tmp.path().string()), std::runtime_error);
}
