// Copyright 2026 The dmmlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "doctest.h"
#include "test_util.hpp"

#include "dmm/autodiff.hpp"

#include <cmath>
#include <vector>

using namespace dmm;

namespace {

struct Fixture {
  Parameter a{"a", Matrix(3, 4)};
  Parameter b{"b", Matrix(4, 2)};
  Parameter row{"row", Matrix(1, 2)};
  Fixture() {
    std::vector<Parameter*> ps{&a, &b, &row};
    testing::randomize(ps, 1.0, 3);
  }
  std::vector<Parameter*> params() { return {&a, &b, &row}; }
};

double check(Fixture& f, const std::function<Var(Tape&)>& build) {
  Tape tape;
  Var loss = build(tape);
  Gradients g;
  tape.backward(loss, g);
  auto value = [&] {
    Tape t;
    return build(t).value()(0, 0);
  };
  return testing::gradient_error(f.params(), value, g);
}

}  // namespace

TEST_CASE("matmul, add_row, silu and mse gradients agree with central differences") {
  Fixture f;
  const Matrix target = Matrix::Constant(3, 2, 0.3);
  const double err = check(f, [&](Tape& t) {
    Var h = add_row(matmul(t.param(f.a), t.param(f.b)), t.param(f.row));
    return mse(silu(h), t.constant(target));
  });
  CHECK(err < 1e-7);
}

TEST_CASE("layer_norm and cross_entropy gradients agree with central differences") {
  Fixture f;
  const std::vector<int> labels{0, 1, 1};
  const double err = check(f, [&](Tape& t) {
    Var h = layer_norm(matmul(t.param(f.a), t.param(f.b)));
    return cross_entropy(add_row(h, t.param(f.row)), labels);
  });
  CHECK(err < 1e-6);
}

TEST_CASE("gather, select_row, row_scale, sub, scale and sum gradients") {
  Fixture f;
  const std::vector<int> index{1, 0, 1, 1};
  Vector coeff(4);
  coeff << 0.5, -1.0, 2.0, 0.25;
  const double err = check(f, [&](Tape& t) {
    Var rows = gather_rows(matmul(t.param(f.a), t.param(f.b)), std::vector<int>{2, 0});
    Var g = row_scale(gather_rows(rows, index), coeff);
    Var r = select_row(g, 2);
    Var terms[] = {mse(sub(g, t.constant(Matrix::Ones(4, 2))), t.constant(Matrix::Zero(4, 2))),
                   scale(mse(add(r, t.param(f.row)), t.constant(Matrix::Zero(1, 2))), 3.0)};
    return sum(terms);
  });
  CHECK(err < 1e-7);
}

TEST_CASE("untracked parameters receive no gradient") {
  Fixture f;
  Tape tape;
  Var loss = mse(matmul(tape.param(f.a, false), tape.param(f.b)), tape.constant(Matrix::Zero(3, 2)));
  Gradients g;
  tape.backward(loss, g);
  CHECK(g.find(&f.a) == nullptr);
  CHECK(g.find(&f.b) != nullptr);
}

TEST_CASE("cross_entropy of uniform logits is log of the class count") {
  Tape tape;
  const std::vector<int> labels{0, 3, 5};
  Var ce = cross_entropy(tape.constant(Matrix::Zero(3, 6)), labels);
  CHECK(ce.value()(0, 0) == doctest::Approx(std::log(6.0)).epsilon(1e-14));
}

TEST_CASE("gradient accumulation and scaling") {
  Parameter p{"p", Matrix::Zero(1, 2)};
  Gradients a, b;
  a.accumulate(&p, Matrix::Ones(1, 2));
  b.accumulate(&p, Matrix::Constant(1, 2, 3.0));
  a.add(b);
  a.scale(0.5);
  CHECK((*a.find(&p))(0, 1) == 2.0);
}
