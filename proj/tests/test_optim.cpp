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

#include "dmm/optim.hpp"

#include <cmath>

using namespace dmm;

TEST_CASE("first Adam step moves each entry by the learning rate") {
  Parameter p{"p", (Matrix(1, 3) << 1.0, -2.0, 0.5).finished()};
  Adam opt({&p}, {.lr = 0.1});
  Gradients g;
  g.accumulate(&p, (Matrix(1, 3) << 3.0, -0.01, 0.0).finished());
  opt.step(g);
  CHECK(p.value(0, 0) == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(p.value(0, 1) == doctest::Approx(-1.9).epsilon(1e-5));
  CHECK(p.value(0, 2) == 0.5);
  CHECK(opt.steps() == 1);
}

TEST_CASE("Adam minimizes a quadratic") {
  Parameter p{"p", Matrix::Constant(2, 2, 5.0)};
  Adam opt({&p}, {.lr = 0.05});
  for (int k = 0; k < 2000; ++k) {
    Gradients g;
    g.accumulate(&p, 2.0 * p.value);
    opt.step(g);
  }
  CHECK(p.value.cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("parameters without gradients are left alone") {
  Parameter a{"a", Matrix::Ones(1, 1)}, b{"b", Matrix::Ones(1, 1)};
  Adam opt({&a, &b}, {.lr = 0.1});
  Gradients g;
  g.accumulate(&a, Matrix::Ones(1, 1));
  opt.step(g);
  CHECK(a.value(0, 0) < 1.0);
  CHECK(b.value(0, 0) == 1.0);
}
