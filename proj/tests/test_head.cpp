#include "riskformer/head.hpp"

#include <doctest.h>

#include <cmath>

#include "riskformer/errors.hpp"
#include "riskformer/rng.hpp"

using namespace riskformer;

namespace {

Tensor2 random_tensor(int r, int c, Rng& rng, double scale = 0.5) {
  Tensor2 t(r, c);
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = rng.normal() * scale;
  return t;
}

}  // namespace

TEST_CASE("single position pools with weight exactly 1") {
  Rng rng(1);
  PoolParams p{random_tensor(3, 3, rng), random_tensor(3, 1, rng)};
  Tape tape;
  PoolLeaves leaves = register_pool(tape, p);
  NodeId a = pooling_weights(tape, tape.leaf(random_tensor(1, 3, rng)), leaves, {});
  CHECK(tape.value(a).rows() == 1);
  CHECK(tape.value(a).cols() == 1);
  CHECK(tape.value(a)(0, 0) == 1.0);
}

TEST_CASE("identical rows pool uniformly over valid positions") {
  Rng rng(2);
  PoolParams p{random_tensor(3, 2, rng), random_tensor(2, 1, rng)};
  Tensor2 h(4, 3, {1, 2, 3, 1, 2, 3, 1, 2, 3, 1, 2, 3});
  Tape tape;
  PoolLeaves leaves = register_pool(tape, p);

  NodeId all = pooling_weights(tape, tape.leaf(h), leaves, {});
  for (int j = 0; j < 4; ++j) CHECK(tape.value(all)(0, j) == doctest::Approx(0.25).epsilon(1e-12));

  NodeId masked = pooling_weights(tape, tape.leaf(h), leaves, {1, 0, 1, 0});
  CHECK(tape.value(masked)(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(tape.value(masked)(0, 1) == 0.0);
  CHECK(tape.value(masked)(0, 2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(tape.value(masked)(0, 3) == 0.0);
}

TEST_CASE("pooling scores [0, ln 3] give weights [0.25, 0.75]") {
  // With W_a = [[1]], v = [2]: score_i = 2 tanh(h_i). Row 0 scores 0; row 1
  // is atanh(ln(3)/2) so its score is exactly ln 3.
  PoolParams p{Tensor2(1, 1, {1.0}), Tensor2(1, 1, {2.0})};
  const double c = std::atanh(std::log(3.0) / 2.0);
  Tape tape;
  PoolLeaves leaves = register_pool(tape, p);
  NodeId a = pooling_weights(tape, tape.leaf(Tensor2(2, 1, {0.0, c})), leaves, {});
  CHECK(tape.value(a)(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(tape.value(a)(0, 1) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("no valid pooling positions is an error") {
  Rng rng(3);
  PoolParams p{random_tensor(2, 2, rng), random_tensor(2, 1, rng)};
  Tape tape;
  PoolLeaves leaves = register_pool(tape, p);
  CHECK_THROWS_AS(
      static_cast<void>(pooling_weights(tape, tape.leaf(random_tensor(2, 2, rng)), leaves, {0, 0})),
      DegenerateRowError);
}

TEST_CASE("pooling weights sum to 1 within 1e-12") {
  Rng rng(4);
  PoolParams p{random_tensor(5, 4, rng), random_tensor(4, 1, rng)};
  Tape tape;
  PoolLeaves leaves = register_pool(tape, p);
  NodeId a = pooling_weights(tape, tape.leaf(random_tensor(7, 5, rng)), leaves,
                             {1, 1, 0, 1, 1, 1, 0});
  double sum = 0.0;
  for (int j = 0; j < 7; ++j) sum += tape.value(a)(0, j);
  CHECK(std::abs(sum - 1.0) <= 1e-12);
}

TEST_CASE("pool oracles") {
  Tape tape;
  NodeId h = tape.leaf(Tensor2(2, 2, {0, 0, 4, 8}));

  NodeId mix = tape.leaf(Tensor2(1, 2, {0.25, 0.75}));
  CHECK(tape.value(pool(tape, h, mix)) == Tensor2(1, 2, {3.0, 6.0}));

  NodeId onehot = tape.leaf(Tensor2(1, 2, {0.0, 1.0}));
  CHECK(tape.value(pool(tape, h, onehot)) == Tensor2(1, 2, {4.0, 8.0}));

  NodeId uniform = tape.leaf(Tensor2(1, 2, {0.5, 0.5}));
  CHECK(tape.value(pool(tape, h, uniform)) == Tensor2(1, 2, {2.0, 4.0}));

  NodeId wrong = tape.leaf(Tensor2(1, 3, {0.5, 0.25, 0.25}));
  CHECK_THROWS_AS(static_cast<void>(pool(tape, h, wrong)), ShapeError);
}

TEST_CASE("pool is linear in H for fixed weights") {
  Rng rng(5);
  Tensor2 h = random_tensor(3, 4, rng);
  Tensor2 h2 = h;
  for (std::size_t i = 0; i < h2.size(); ++i) h2.data()[i] *= 3.0;
  Tensor2 a(1, 3, {0.2, 0.3, 0.5});

  Tape tape;
  const Tensor2& z = tape.value(pool(tape, tape.leaf(h), tape.leaf(a)));
  const Tensor2& z2 = tape.value(pool(tape, tape.leaf(h2), tape.leaf(a)));
  for (std::size_t i = 0; i < z.size(); ++i) {
    CHECK(z2.data()[i] == doctest::Approx(3.0 * z.data()[i]).epsilon(1e-12));
  }
}

TEST_CASE("classify oracles") {
  HeadParams p{Tensor2(2, 1, {1.0, -1.0}), Tensor2(1, 1)};
  Tape tape;
  HeadLeaves leaves = register_head(tape, p);

  // logit 0 -> 0.5
  CHECK(tape.value(classify(tape, tape.leaf(Tensor2(1, 2, {1.0, 1.0})), leaves))(0, 0) == 0.5);

  // logit ln 3 -> 0.75
  NodeId y = classify(tape, tape.leaf(Tensor2(1, 2, {std::log(3.0), 0.0})), leaves);
  CHECK(tape.value(y)(0, 0) == doctest::Approx(0.75).epsilon(1e-12));

  // monotone in the logit, bounded in (0,1)
  double prev = 0.0;
  for (double logit : {-30.0, -2.0, 0.0, 2.0, 30.0}) {
    Tape t2;
    HeadLeaves l2 = register_head(t2, p);
    const double out = t2.value(classify(t2, t2.leaf(Tensor2(1, 2, {logit, 0.0})), l2))(0, 0);
    CHECK(out > prev);
    CHECK(out > 0.0);
    CHECK(out < 1.0);
    prev = out;
  }
}

TEST_CASE("bce_loss over a small batch") {
  Tape tape;
  std::vector<NodeId> yhat{tape.leaf(Tensor2(1, 1, {0.9})), tape.leaf(Tensor2(1, 1, {0.2}))};
  std::vector<int> labels{1, 0};
  NodeId loss = bce_loss(tape, yhat, labels);
  CHECK(tape.value(loss)(0, 0) ==
        doctest::Approx((-std::log(0.9) - std::log(0.8)) / 2.0).epsilon(1e-14));
  CHECK(tape.value(loss)(0, 0) >= 0.0);

  std::vector<int> bad{1, 2};
  CHECK_THROWS_AS(static_cast<void>(bce_loss(tape, yhat, bad)), ContractError);
  std::vector<int> mismatched{1};
  CHECK_THROWS_AS(static_cast<void>(bce_loss(tape, yhat, mismatched)), ShapeError);
}

TEST_CASE("softmax shift invariance is bit-exact on exactly representable scores") {
  // 0.5, 1.25 and the shift 4.0 are all exact in binary, so the shifted
  // differences are identical and the weights match bitwise.
  Tape tape;
  NodeId a = tape.softmax_rows(tape.leaf(Tensor2(1, 2, {0.5, 1.25})));
  NodeId b = tape.softmax_rows(tape.leaf(Tensor2(1, 2, {4.5, 5.25})));
  CHECK(tape.value(a) == tape.value(b));
}
