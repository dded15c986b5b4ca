#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "crowdloc/common/error.hpp"
#include "crowdloc/nn/checkpoint.hpp"
#include "crowdloc/nn/ops.hpp"

using namespace crowdloc;
using namespace crowdloc::nn;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "crowdloc_optim_tests";
  fs::create_directories(dir);
  return dir / name;
}

ModelConfig tiny() {
  ModelConfig c;
  c.base_channels = 4;
  c.hourglass_levels = 2;
  return c;
}

Tensor<float> random_image(std::uint64_t seed, Shape s) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g;
  Tensor<float> t(s);
  for (auto& v : t.values()) v = g(rng);
  return t;
}

}  // namespace

TEST_SUITE("optim") {
  TEST_CASE("adam matches a scalar reference") {
    ParamCollector<double> params;
    Var<double> w(Tensor<double>({1, 1, 1, 2}, 0.0), true);
    w.mutable_value()[0] = 0.5;
    w.mutable_value()[1] = -1.5;
    params.param("w", w);
    AdamOptions o;
    o.lr = 0.01;
    o.weight_decay = 0.1;
    Adam<double> adam(params, o);

    double ref[2] = {0.5, -1.5}, m[2] = {0, 0}, v[2] = {0, 0};
    for (int t = 1; t <= 5; ++t) {
      adam.zero_grad();
      // loss = sum(w^3)
      backward(sum(mul(mul(w, w), w)));
      adam.step();
      for (int i = 0; i < 2; ++i) {
        const double g = 3 * ref[i] * ref[i] + o.weight_decay * ref[i];
        m[i] = 0.9 * m[i] + 0.1 * g;
        v[i] = 0.999 * v[i] + 0.001 * g * g;
        const double mh = m[i] / (1 - std::pow(0.9, t));
        const double vh = v[i] / (1 - std::pow(0.999, t));
        ref[i] -= o.lr * mh / (std::sqrt(vh) + o.eps);
      }
      CHECK(w.value()[0] == doctest::Approx(ref[0]).epsilon(1e-12));
      CHECK(w.value()[1] == doctest::Approx(ref[1]).epsilon(1e-12));
    }
    CHECK(adam.steps() == 5);
  }

  TEST_CASE("defaults match the reference optimizer setup") {
    const AdamOptions o;
    CHECK(o.lr == 0.0003);
    CHECK(o.weight_decay == 0.001);
  }

  TEST_CASE("zero learning rate leaves parameters bitwise unchanged") {
    CrowdNet<float> net(tiny(), 5);
    const auto before = model_state(net);
    AdamOptions o;
    o.lr = 0.0;
    Adam<float> adam(net.parameters(), o);
    for (int i = 0; i < 3; ++i) {
      adam.zero_grad();
      const auto maps = net.forward(Var<float>(random_image(std::uint64_t(i), {2, 3, 8, 8})));
      backward(sum(add(maps[0], maps[1])));
      adam.step();
    }
    const auto after = model_state(net);
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i) {
      if (before[i].name.rfind("param:", 0) == 0) CHECK(before[i].tensor == after[i].tensor);
    }
  }

  TEST_CASE("archive round trip") {
    std::vector<ArchiveEntry> entries{{"a", random_image(1, {2, 3, 1, 4})}, {"scalar", Tensor<float>(Shape{}, 2.5f)}};
    const auto path = scratch("archive.bin");
    write_archive(path, entries);
    const auto back = read_archive(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].name == "a");
    CHECK(back[0].tensor == entries[0].tensor);
    CHECK(back[1].tensor[0] == 2.5f);

    auto bytes = std::vector<char>(fs::file_size(path));
    {
      std::ifstream in(path, std::ios::binary);
      in.read(bytes.data(), std::streamsize(bytes.size()));
    }
    {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      out.write(bytes.data(), std::streamsize(bytes.size() - 3));
    }
    CHECK_THROWS_AS(read_archive(path), Error);
  }

  TEST_CASE("model state round trip reproduces outputs bitwise") {
    CrowdNet<float> a(tiny(), 9);
    // move the BN running statistics away from their defaults
    a.forward(Var<float>(random_image(3, {2, 3, 8, 8})));
    const auto path = scratch("model.bin");
    write_archive(path, model_state(a));
    CrowdNet<float> b(tiny(), 1234);
    load_model_state(b, read_archive(path));
    a.set_training(false);
    b.set_training(false);
    const auto x = random_image(4, {1, 3, 8, 8});
    CHECK(a.forward(Var<float>(x))[1].value() == b.forward(Var<float>(x))[1].value());
  }

  TEST_CASE("model state rejects a different architecture") {
    CrowdNet<float> a(tiny(), 9);
    auto other = tiny();
    other.dcpan = false;
    CrowdNet<float> b(other, 9);
    CHECK_THROWS_AS(load_model_state(b, model_state(a)), Error);
  }

  TEST_CASE("optimizer state round trip") {
    CrowdNet<float> net(tiny(), 2);
    Adam<float> adam(net.parameters(), {});
    adam.zero_grad();
    const auto maps = net.forward(Var<float>(random_image(5, {2, 3, 8, 8})));
    backward(sum(maps[1]));
    adam.step();
    const auto state = optimizer_state(adam, net);
    Adam<float> fresh(net.parameters(), {});
    load_optimizer_state(fresh, net, state);
    CHECK(fresh.steps() == 1);
    REQUIRE(fresh.first_moments().size() == adam.first_moments().size());
    for (std::size_t i = 0; i < fresh.first_moments().size(); ++i) {
      CHECK(fresh.first_moments()[i] == adam.first_moments()[i]);
      CHECK(fresh.second_moments()[i] == adam.second_moments()[i]);
    }
  }
}
