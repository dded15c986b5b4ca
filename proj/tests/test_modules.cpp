#include <doctest.h>

#include <algorithm>
#include <random>

#include "crowdloc/common/error.hpp"
#include "crowdloc/nn/dcpan.hpp"
#include "crowdloc/nn/focal_loss.hpp"
#include "crowdloc/nn/hfgdu.hpp"
#include "crowdloc/nn/model.hpp"
#include "crowdloc/nn/ops.hpp"
#include "support/gradcheck.hpp"

using namespace crowdloc;
using namespace crowdloc::nn;
using testing::grad_check;
using testing::random_tensor;

namespace {

constexpr double kTol = 1e-4;

std::vector<testing::Leaf> leaves_of(ParamCollector<double>& params) {
  std::vector<testing::Leaf> out;
  for (const auto& p : params.params()) out.push_back({p.name, p.var});
  return out;
}

bool strictly_inside_unit(const Tensor<double>& t) {
  for (double v : t.values()) {
    if (!(v > 0.0 && v < 1.0)) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("modules") {
  TEST_CASE("sa_encode") {
    std::mt19937_64 rng(1);
    const auto single = random_tensor({1, 1, 5, 5}, rng);
    const auto enc = sa_encode(Var<double>(single)).value();
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 5; ++c) {
        CHECK(enc.at(0, 0, r, c) == single.at(0, 0, r, c));
        CHECK(enc.at(0, 1, r, c) == single.at(0, 0, r, c));
      }
    Tensor<double> two({1, 2, 3, 3});
    for (int i = 0; i < 9; ++i) {
      two[std::size_t(i)] = 1.0;
      two[std::size_t(9 + i)] = 3.0;
    }
    const auto e2 = sa_encode(Var<double>(two)).value();
    for (int i = 0; i < 9; ++i) {
      CHECK(e2[std::size_t(i)] == 3.0);
      CHECK(e2[std::size_t(9 + i)] == 2.0);
    }
    const auto e4 = sa_encode(Var<double>(random_tensor({2, 4, 8, 8}, rng))).value();
    for (int n = 0; n < 2; ++n)
      for (int i = 0; i < 64; ++i) CHECK(e4.plane(n, 0)[i] >= e4.plane(n, 1)[i]);
  }

  TEST_CASE("msfe shape, linearity and gradients") {
    Rng rng(2);
    Msfe<double> msfe(rng);
    std::mt19937_64 data(3);
    auto x = Var<double>(random_tensor({1, 2, 16, 16}, data), true);
    CHECK(msfe.forward(x).shape() == Shape{1, 1, 16, 16});

    ParamCollector<double> params;
    msfe.collect(params, "msfe");
    auto leaves = leaves_of(params);
    leaves.push_back({"input", &x});
    const auto r = grad_check(leaves, [&] { return msfe.forward(x); });
    INFO(r.worst);
    CHECK(r.max_rel_error <= kTol);

    for (const auto& p : params.params()) p.var->mutable_value().fill(0.0);
    for (double v : msfe.forward(x).value().values()) CHECK(v == 0.0);
  }

  TEST_CASE("lce shape, constant input and gradients") {
    Rng rng(4);
    Lce<double> lce(rng);
    auto constant = Var<double>(Tensor<double>({2, 1, 16, 16}, 0.3));
    const auto c_out = lce.forward(constant, true).value();
    CHECK(c_out.shape() == Shape{2, 1, 16, 16});
    // zero contrast everywhere, so the output is spatially constant
    for (double v : c_out.values()) CHECK(v == doctest::Approx(c_out[0]));

    std::mt19937_64 data(5);
    auto x = Var<double>(random_tensor({2, 1, 8, 8}, data), true);
    ParamCollector<double> params;
    lce.collect(params, "lce");
    auto leaves = leaves_of(params);
    leaves.push_back({"input", &x});
    const auto r = grad_check(leaves, [&] { return lce.forward(x, true); });
    INFO(r.worst);
    CHECK(r.max_rel_error <= kTol);
  }

  TEST_CASE("dcpan gate range and gradients") {
    Rng rng(6);
    Dcpan<double> dcpan(rng);
    std::mt19937_64 data(7);
    auto x = Var<double>(random_tensor({2, 4, 8, 8}, data, -2.0, 2.0), true);
    const auto tr = dcpan.trace(x, true);
    CHECK(tr.output.shape() == x.shape());
    CHECK(strictly_inside_unit(tr.weight.value()));
    for (std::size_t i = 0; i < x.value().numel(); ++i) {
      if (x.value()[i] != 0.0) CHECK(std::abs(tr.output.value()[i]) < std::abs(x.value()[i]));
    }
    ParamCollector<double> params;
    dcpan.collect(params, "dcpan");
    auto leaves = leaves_of(params);
    leaves.push_back({"input", &x});
    const auto r = grad_check(leaves, [&] { return dcpan.forward(x, true); });
    INFO(r.worst);
    CHECK(r.max_rel_error <= kTol);
  }

  TEST_CASE("hfgdu initial high-pass kernel") {
    Rng rng(8);
    Hfgdu<double> up(4, rng);
    const auto& hp = up.high_pass().value();
    CHECK(hp.shape() == Shape{4, 1, 3, 3});
    for (int c = 0; c < 4; ++c) {
      double s = 0.0;
      for (int k = 0; k < 9; ++k) s += hp[std::size_t(c * 9 + k)];
      CHECK(s == 0.0);
      CHECK(hp.at(c, 0, 1, 1) == 1.0);
      CHECK(hp.at(c, 0, 0, 0) == -0.125);
    }
    auto coarse = Var<double>(Tensor<double>({1, 4, 8, 8}, 0.75));
    std::mt19937_64 data(9);
    auto fine = Var<double>(random_tensor({1, 4, 16, 16}, data));
    const auto tr = up.trace(coarse, fine);
    for (double v : tr.hf.value().values()) CHECK(v == 0.0);
  }

  TEST_CASE("hfgdu shapes, ranges and gradients") {
    Rng rng(10);
    Hfgdu<double> up(4, rng);
    std::mt19937_64 data(11);
    auto coarse = Var<double>(random_tensor({1, 4, 8, 8}, data), true);
    auto fine = Var<double>(random_tensor({1, 4, 16, 16}, data), true);
    const auto tr = up.trace(coarse, fine);
    CHECK(tr.output.shape() == Shape{1, 4, 16, 16});
    CHECK(tr.offset.shape() == Shape{1, 18, 16, 16});
    CHECK(strictly_inside_unit(tr.comp.value()));
    CHECK(strictly_inside_unit(tr.gate.value()));
    for (std::size_t i = 0; i < tr.up.value().numel(); ++i) {
      const double u = tr.up.value()[i];
      if (u == 0.0) continue;
      const double ratio = tr.hfdc.value()[i] / u;
      CHECK(ratio > 1.0);
      CHECK(ratio < 2.0);
    }
    ParamCollector<double> params;
    up.collect(params, "hfgdu");
    auto leaves = leaves_of(params);
    leaves.push_back({"coarse", &coarse});
    leaves.push_back({"fine", &fine});
    const auto r = grad_check(leaves, [&] { return up.forward(coarse, fine); });
    INFO(r.worst);
    CHECK(r.max_rel_error <= kTol);
  }

  TEST_CASE("hfgdu rejects mismatched inputs") {
    Rng rng(12);
    Hfgdu<double> up(4, rng);
    auto coarse = Var<double>(Tensor<double>({1, 4, 8, 8}));
    CHECK_THROWS_AS(up.forward(coarse, Var<double>(Tensor<double>({1, 4, 15, 16}))), Error);
    CHECK_THROWS_AS(up.forward(coarse, Var<double>(Tensor<double>({1, 3, 16, 16}))), Error);
  }

  TEST_CASE("location head range and gradients") {
    Rng rng(13);
    LocationHead<double> head(4, rng);
    std::mt19937_64 data(14);
    auto x = Var<double>(random_tensor({1, 4, 6, 6}, data, -3.0, 3.0), true);
    CHECK(strictly_inside_unit(head.forward(x).value()));
    ParamCollector<double> params;
    head.collect(params, "head");
    auto leaves = leaves_of(params);
    leaves.push_back({"input", &x});
    const auto r = grad_check(leaves, [&] { return head.forward(x); });
    INFO(r.worst);
    CHECK(r.max_rel_error <= kTol);
  }

  TEST_CASE("focal loss limits, oracle value and gradients") {
    // perfect prediction
    Tensor<double> target({1, 1, 3, 3}, 0.2);
    Tensor<double> centers({1, 1, 3, 3}, 0.0);
    target.at(0, 0, 1, 1) = 1.0;
    centers.at(0, 0, 1, 1) = 1.0;
    Tensor<double> perfect({1, 1, 3, 3}, 1e-6);
    perfect.at(0, 0, 1, 1) = 1.0 - 1e-6;
    CHECK(focal_loss(Var<double>(perfect), target, centers).value()[0] <= 1e-4);

    // prediction equal to the target: scalar evaluation of the formula
    std::mt19937_64 data(15);
    Tensor<double> y({1, 1, 3, 3});
    std::uniform_real_distribution<double> u(0.05, 0.9);
    for (auto& v : y.values()) v = u(data);
    y.at(0, 0, 1, 1) = 1.0;
    double expected = 0.0;
    for (int i = 0; i < 9; ++i) {
      const double q = std::clamp(y[std::size_t(i)], 1e-6, 1.0 - 1e-6);
      if (i == 4) {
        expected += (1 - q) * (1 - q) * std::log(q);
      } else {
        expected += std::pow(1 - y[std::size_t(i)], 4) * q * q * std::log(1 - q);
      }
    }
    CHECK(focal_loss(Var<double>(y), y, centers).value()[0] == doctest::Approx(-expected).epsilon(1e-12));

    for (int trial = 0; trial < 100; ++trial) {
      auto pred = random_tensor({2, 1, 4, 4}, data, 0.0, 1.0);
      auto t = random_tensor({2, 1, 4, 4}, data, 0.0, 1.0);
      Tensor<double> m({2, 1, 4, 4}, 0.0);
      m[std::size_t(trial % 32)] = 1.0;
      CHECK(focal_loss(Var<double>(pred), t, m).value()[0] >= 0.0);
    }

    CHECK_THROWS_AS(focal_loss(Var<double>(perfect), target, Tensor<double>({1, 1, 3, 3}, 0.0)), Error);

    auto logits = Var<double>(random_tensor({2, 1, 6, 6}, data, -3.0, 3.0), true);
    auto t = random_tensor({2, 1, 6, 6}, data, 0.0, 1.0);
    Tensor<double> m({2, 1, 6, 6}, 0.0);
    m.at(0, 0, 2, 3) = m.at(1, 0, 4, 1) = m.at(1, 0, 0, 0) = 1.0;
    const auto r = grad_check({{"logits", &logits}}, [&] { return focal_loss(sigmoid(logits), t, m); });
    INFO(r.worst);
    CHECK(r.max_rel_error <= kTol);
  }

  TEST_CASE("center mask marks annotated cells") {
    const auto m = center_mask<float>({targets::PointSet(4, 5, {{1.4, 2.6}}), targets::PointSet(4, 5, {{3, 4}})});
    CHECK(m.shape() == Shape{2, 1, 4, 5});
    CHECK(m.at(0, 0, 1, 3) == 1.0f);
    CHECK(m.at(1, 0, 3, 4) == 1.0f);
    double total = 0;
    for (float v : m.values()) total += v;
    CHECK(total == 2.0);
  }

  TEST_CASE("model config validation and input size hint") {
    ModelConfig c;
    c.stages = 3;
    CHECK_THROWS_AS(c.validate(), Error);
    c.stages = 2;
    c.hourglass_levels = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    ModelConfig d;
    try {
      check_input_size(d, 250, 256);
      FAIL("expected a configuration error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::config);
      CHECK(std::string(e.what()).find("256") != std::string::npos);
    }
    CHECK_NOTHROW(check_input_size(d, 256, 512));
  }

  TEST_CASE("model shapes, range and determinism") {
    ModelConfig c;
    c.base_channels = 8;
    c.hourglass_levels = 3;
    CrowdNet<float> a(c, 42), b(c, 42);
    std::mt19937_64 data(16);
    Tensor<float> x({2, 3, 32, 48});
    std::normal_distribution<float> g;
    for (auto& v : x.values()) v = g(data);
    const auto oa = a.forward(Var<float>(x));
    const auto ob = b.forward(Var<float>(x));
    REQUIRE(oa.size() == 2);
    for (std::size_t s = 0; s < 2; ++s) {
      CHECK(oa[s].shape() == Shape{2, 1, 32, 48});
      CHECK(oa[s].value() == ob[s].value());
      for (float v : oa[s].value().values()) {
        CHECK(v > 0.0f);
        CHECK(v < 1.0f);
      }
    }
    a.set_training(false);
    const auto e1 = a.forward(Var<float>(x));
    const auto e2 = a.forward(Var<float>(x));
    CHECK(e1[1].value() == e2[1].value());
    CHECK_THROWS_AS(a.forward(Var<float>(Tensor<float>({1, 3, 30, 48}))), Error);
  }

  TEST_CASE("ablation switches remove module parameters") {
    ModelConfig c;
    c.base_channels = 4;
    c.hourglass_levels = 2;
    c.dcpan = false;
    c.upsampler = Upsampler::bilinear;
    CrowdNet<float> net(c, 1);
    for (const auto& name : net.parameter_names()) {
      CHECK(name.find("dcpan") == std::string::npos);
      CHECK(name.find("hfgdu") == std::string::npos);
    }
    c.dcpan = true;
    c.upsampler = Upsampler::hfgdu;
    CrowdNet<float> full(c, 1);
    const auto names = full.parameter_names();
    CHECK(std::any_of(names.begin(), names.end(), [](auto& n) { return n.find("dcpan") != std::string::npos; }));
    CHECK(std::any_of(names.begin(), names.end(), [](auto& n) { return n.find("hfgdu") != std::string::npos; }));
    CHECK(full.parameter_count() > net.parameter_count());
  }

  TEST_CASE("whole-model gradients on a tiny network") {
    ModelConfig c;
    c.base_channels = 2;
    c.hourglass_levels = 1;
    CrowdNet<double> net(c, 3);
    std::mt19937_64 data(17);
    auto x = Var<double>(random_tensor({2, 3, 4, 4}, data), true);
    auto params = net.parameters();
    auto leaves = leaves_of(params);
    leaves.push_back({"image", &x});
    const auto r = grad_check(leaves, [&] {
      const auto maps = net.forward(x);
      return concat_channels<double>({maps[0], maps[1]});
    });
    INFO(r.worst);
    CHECK(r.max_rel_error <= kTol);
  }
}
