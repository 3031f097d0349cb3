#include "riskformer/embedder.hpp"

#include <doctest.h>

#include <cmath>

#include "riskformer/errors.hpp"
#include "riskformer/grad_check.hpp"
#include "riskformer/rng.hpp"

using namespace riskformer;

namespace {

EmbedParams small_params(int d_in, int d_m, std::uint64_t seed) {
  Rng rng(seed);
  auto rand = [&](int r, int c) {
    Tensor2 t(r, c);
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = rng.normal() * 0.5;
    return t;
  };
  return EmbedParams{rand(d_in, d_m), rand(1, d_m), rand(1, d_m), rand(1, d_m)};
}

}  // namespace

TEST_CASE("identity embedding passes X through") {
  EmbedParams p{Tensor2::identity(3), Tensor2(1, 3), Tensor2(1, 3), Tensor2(1, 3)};
  Tensor2 x(2, 3, {1, 2, 3, 4, 5, 6});
  Tape tape;
  EmbedLeaves leaves = register_embed(tape, p);
  NodeId h0 = embed_features(tape, tape.leaf(x), leaves);
  CHECK(tape.value(h0) == x);
}

TEST_CASE("zero input embeds to the bias row") {
  EmbedParams p{Tensor2(2, 3), Tensor2(1, 3, {0.1, -0.2, 0.3}), Tensor2(1, 3), Tensor2(1, 3)};
  p.W_e = Tensor2::full(2, 3, 5.0);
  Tape tape;
  EmbedLeaves leaves = register_embed(tape, p);
  NodeId h0 = embed_features(tape, tape.leaf(Tensor2(4, 2)), leaves);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) CHECK(tape.value(h0)(i, j) == p.b_e(0, j));
}

TEST_CASE("embedding hand oracle") {
  EmbedParams p{Tensor2(2, 2, {1, 1, 1, -1}), Tensor2(1, 2, {0.5, 0.5}), Tensor2(1, 2),
                Tensor2(1, 2)};
  Tape tape;
  EmbedLeaves leaves = register_embed(tape, p);
  NodeId h0 = embed_features(tape, tape.leaf(Tensor2(2, 2, {1, 0, 0, 2})), leaves);
  CHECK(tape.value(h0) == Tensor2(2, 2, {1.5, 1.5, 2.5, -1.5}));
}

TEST_CASE("embedding is linear when the bias is zero") {
  EmbedParams p = small_params(3, 4, 1);
  p.b_e = Tensor2(1, 4);
  Rng rng(2);
  Tensor2 x(2, 3);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  Tensor2 x2 = x;
  for (std::size_t i = 0; i < x2.size(); ++i) x2.data()[i] *= 2.5;

  Tape tape;
  EmbedLeaves leaves = register_embed(tape, p);
  const Tensor2& h = tape.value(embed_features(tape, tape.leaf(x), leaves));
  const Tensor2& h2 = tape.value(embed_features(tape, tape.leaf(x2), leaves));
  for (std::size_t i = 0; i < h.size(); ++i) {
    CHECK(h2.data()[i] == doctest::Approx(2.5 * h.data()[i]).epsilon(1e-12));
  }
}

TEST_CASE("temporal encoding oracles") {
  // dt=0 with zero bias -> zero row; negative bias also clips to zero
  EmbedParams p{Tensor2::identity(2), Tensor2(1, 2), Tensor2(1, 2, {1.0, 1.0}), Tensor2(1, 2)};
  {
    Tape tape;
    EmbedLeaves leaves = register_embed(tape, p);
    NodeId t = temporal_encode(tape, std::vector<double>{0.0}, leaves);
    CHECK(tape.value(t) == Tensor2(1, 2));
  }
  {
    EmbedParams q = p;
    q.b_t = Tensor2(1, 2, {-1.0, -1.0});
    Tape tape;
    EmbedLeaves leaves = register_embed(tape, q);
    NodeId t = temporal_encode(tape, std::vector<double>{0.0}, leaves);
    CHECK(tape.value(t) == Tensor2(1, 2));
  }
  // W_t = [2,-1], b_t = [0, 0.5], dt = 3 -> relu([6, -2.5]) = [6, 0]
  {
    EmbedParams q = p;
    q.W_t = Tensor2(1, 2, {2.0, -1.0});
    q.b_t = Tensor2(1, 2, {0.0, 0.5});
    Tape tape;
    EmbedLeaves leaves = register_embed(tape, q);
    NodeId t = temporal_encode(tape, std::vector<double>{3.0}, leaves);
    CHECK(tape.value(t) == Tensor2(1, 2, {6.0, 0.0}));
  }
}

TEST_CASE("temporal encoding rejects negative gaps and is nonnegative") {
  EmbedParams p = small_params(2, 4, 3);
  Tape tape;
  EmbedLeaves leaves = register_embed(tape, p);
  CHECK_THROWS_AS(static_cast<void>(temporal_encode(tape, std::vector<double>{1.0, -0.5}, leaves)),
                  ContractError);

  NodeId t = temporal_encode(tape, std::vector<double>{0.0, 0.7, 12.0}, leaves);
  for (std::size_t i = 0; i < tape.value(t).size(); ++i) CHECK(tape.value(t).data()[i] >= 0.0);
}

TEST_CASE("log1p switch compresses the gap axis") {
  EmbedParams p{Tensor2::identity(1), Tensor2(1, 1), Tensor2(1, 1, {1.0}), Tensor2(1, 1)};
  Tape tape;
  EmbedLeaves leaves = register_embed(tape, p);
  NodeId raw = temporal_encode(tape, std::vector<double>{10.0}, leaves, false);
  NodeId logged = temporal_encode(tape, std::vector<double>{10.0}, leaves, true);
  CHECK(tape.value(raw)(0, 0) == 10.0);
  CHECK(tape.value(logged)(0, 0) == doctest::Approx(std::log1p(10.0)).epsilon(1e-15));
}

TEST_CASE("combine adds elementwise and commutes") {
  Tape tape;
  NodeId a = tape.leaf(Tensor2(1, 2, {1.0, 2.0}));
  NodeId b = tape.leaf(Tensor2(1, 2, {0.5, -0.5}));
  CHECK(tape.value(combine(tape, a, b)) == Tensor2(1, 2, {1.5, 1.5}));
  const Tensor2 ba = tape.value(combine(tape, b, a));
  const Tensor2 ab = tape.value(combine(tape, a, b));
  CHECK(ba == ab);
  NodeId zero = tape.leaf(Tensor2(1, 2));
  CHECK(tape.value(combine(tape, a, zero)) == tape.value(a));
}

TEST_CASE("equal features with different gaps embed differently when W_t != 0") {
  EmbedParams p = small_params(3, 4, 5);
  Tensor2 x(2, 3, {1, 2, 3, 1, 2, 3});  // identical rows
  Tape tape;
  EmbedLeaves leaves = register_embed(tape, p);
  NodeId h = combine(tape, embed_features(tape, tape.leaf(x), leaves),
                     temporal_encode(tape, std::vector<double>{0.5, 9.0}, leaves));
  bool any_diff = false;
  for (int j = 0; j < 4; ++j) any_diff = any_diff || tape.value(h)(0, j) != tape.value(h)(1, j);
  CHECK(any_diff);
}

TEST_CASE("all four embed parameter blocks pass grad_check through a sum probe") {
  EmbedParams p = small_params(3, 4, 8);
  Rng rng(9);
  Tensor2 x(5, 3);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const std::vector<double> dt{0.0, 1.5, 0.2, 7.0, 3.3};

  auto build = [&](Tape& tape, EmbedLeaves& leaves) {
    leaves = register_embed(tape, p);
    NodeId h = combine(tape, embed_features(tape, tape.leaf(x), leaves),
                       temporal_encode(tape, dt, leaves));
    return tape.sum_all(tape.tanh(h));  // tanh keeps the probe nonlinear
  };
  auto f = [&]() {
    Tape tape;
    EmbedLeaves leaves;
    return tape.value(build(tape, leaves))(0, 0);
  };

  Tape tape;
  EmbedLeaves leaves;
  NodeId loss = build(tape, leaves);
  tape.backward(loss);

  std::vector<ParamBlock> blocks{{"W_e", &p.W_e}, {"b_e", &p.b_e}, {"W_t", &p.W_t},
                                 {"b_t", &p.b_t}};
  std::vector<Tensor2> grads{tape.grad(leaves.W_e), tape.grad(leaves.b_e),
                             tape.grad(leaves.W_t), tape.grad(leaves.b_t)};
  CHECK(grad_check(f, blocks, grads, 1e-5, 1e-4).pass);
}
