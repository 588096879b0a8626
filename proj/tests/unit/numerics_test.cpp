// Copyright 2026 The smoodi-desk Authors.
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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <thread>

#include "smoodi/error.hpp"
#include "smoodi/numerics/layers.hpp"
#include "smoodi/numerics/program.hpp"
#include "test_support.hpp"

using namespace smoodi;
using namespace smoodi::num;
using smoodi::testing::check_gradient;
using smoodi::testing::random_tensor;

namespace {

Program identity_program() {
  return Program({{"x", {-1}}}, [](Tape&, const NamedVars& in) {
    return NamedVars{{"y", in.at("x")}};
  });
}

Program sum_of_squares() {
  return Program({{"x", {-1}}}, [](Tape&, const NamedVars& in) {
    return NamedVars{{"y", sum(square(in.at("x")))}};
  });
}

// Scalar random projection of an op's output, so a gradient check exercises
// every output coordinate.
Program projected(std::vector<InputSpec> sig,
                  std::function<Var(const NamedVars&)> f, std::uint64_t seed) {
  return Program(std::move(sig), [f, seed](Tape& t, const NamedVars& in) {
    Var y = f(in);
    Var r = t.constant(random_tensor(y.shape(), seed));
    return NamedVars{{"out", sum(mul(y, r))}};
  });
}

}  // namespace

TEST(Program, IdentityReturnsInput) {
  auto out = identity_program().evaluate({{"x", Tensor::vector({1, 2, 3})}});
  EXPECT_EQ(out.at("y"), Tensor::vector({1, 2, 3}));
}

TEST(Program, SumOfSquaresValue) {
  auto out = sum_of_squares().evaluate({{"x", Tensor::vector({3, 4})}});
  EXPECT_FLOAT_EQ(out.at("y").item(), 25.0f);
}

TEST(Program, LinearLayerEvaluationIsBitIdentical) {
  Rng rng(5);
  ParameterStore ps;
  init_linear(ps, "fc", 16, 8, rng);
  Program p({{"x", {-1, 16}}}, [&ps](Tape& t, const NamedVars& in) {
    Bound b(t, ps, false);
    return NamedVars{{"y", linear(b, "fc", in.at("x"))}};
  });
  NamedTensors in{{"x", random_tensor({4, 16}, 1)}};
  EXPECT_TRUE(bitwise_equal(p.evaluate(in).at("y"), p.evaluate(in).at("y")));
}

TEST(Program, EvaluateDoesNotMutateInputs) {
  NamedTensors in{{"x", random_tensor({32}, 9)}};
  const std::string before = [&] {
    std::ostringstream os;
    write_tensor_record(os, "x", in.at("x"));
    return os.str();
  }();
  (void)sum_of_squares().evaluate(in);
  (void)sum_of_squares().gradient(in, "y", {"x"});
  std::ostringstream os;
  write_tensor_record(os, "x", in.at("x"));
  EXPECT_EQ(before, os.str());
}

TEST(Program, ShapeMismatchIsAnError) {
  Program p({{"x", {2}}}, [](Tape&, const NamedVars& in) {
    return NamedVars{{"y", in.at("x")}};
  });
  try {
    p.evaluate({{"x", Tensor::vector({1, 2, 3})}});
    FAIL() << "expected shape error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(Program, NonFiniteResultIsAnError) {
  Program p({{"x", {1}}}, [](Tape&, const NamedVars& in) {
    return NamedVars{{"y", scale(in.at("x"), 1e30f) * 1e30f}};
  });
  try {
    p.evaluate({{"x", Tensor::vector({1})}});
    FAIL() << "expected non-finite error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
  }
}

TEST(Gradient, SumOfSquares) {
  auto g = sum_of_squares().gradient({{"x", Tensor::vector({3, 4})}}, "y", {"x"});
  EXPECT_EQ(g.at("x"), Tensor::vector({6, 8}));
}

TEST(Gradient, ConstantTimesInput) {
  for (float c : {-2.5f, 0.0f, 3.0f}) {
    Program p({{"x", {-1}}}, [c](Tape&, const NamedVars& in) {
      return NamedVars{{"y", sum(scale(in.at("x"), c))}};
    });
    auto g = p.gradient({{"x", random_tensor({5}, 3)}}, "y", {"x"}).at("x");
    for (float v : g.data()) EXPECT_EQ(v, c);
  }
}

TEST(Gradient, NonScalarOutputIsAnError) {
  try {
    identity_program().gradient({{"x", Tensor::vector({1, 2})}}, "y", {"x"});
    FAIL() << "expected error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(Gradient, DisconnectedInputGetsZeros) {
  Program p({{"x", {2}}, {"unused", {3}}}, [](Tape&, const NamedVars& in) {
    return NamedVars{{"y", sum(in.at("x"))}};
  });
  auto g = p.gradient({{"x", Tensor::vector({1, 2})},
                       {"unused", Tensor::vector({1, 2, 3})}},
                      "y", {"unused"});
  EXPECT_EQ(g.at("unused"), Tensor::zeros({3}));
}

TEST(Gradient, LinearityOverRandomProgramPairs) {
  // d(f + g) = df + dg for random projections of two different op chains.
  for (std::uint64_t s = 0; s < 8; ++s) {
    auto f = [s](Tape& t, Var x) {
      return sum(mul(gelu(x), t.constant(random_tensor(x.shape(), 100 + s))));
    };
    auto g = [s](Tape& t, Var x) {
      return sum(mul(softmax(x), t.constant(random_tensor(x.shape(), 200 + s))));
    };
    Program pf({{"x", {4, 6}}}, [&](Tape& t, const NamedVars& in) {
      return NamedVars{{"y", f(t, in.at("x"))}};
    });
    Program pg({{"x", {4, 6}}}, [&](Tape& t, const NamedVars& in) {
      return NamedVars{{"y", g(t, in.at("x"))}};
    });
    Program pfg({{"x", {4, 6}}}, [&](Tape& t, const NamedVars& in) {
      return NamedVars{{"y", add(f(t, in.at("x")), g(t, in.at("x")))}};
    });
    NamedTensors in{{"x", random_tensor({4, 6}, s)}};
    auto a = pf.gradient(in, "y", {"x"}).at("x");
    auto b = pg.gradient(in, "y", {"x"}).at("x");
    auto c = pfg.gradient(in, "y", {"x"}).at("x");
    for (std::size_t i = 0; i < c.size(); ++i)
      EXPECT_NEAR(c[i], a[i] + b[i], 1e-6f * (1.0f + std::fabs(c[i])));
  }
}

TEST(FiniteDiff, SumOfSquaresNearAnalytic) {
  // Truncation error is zero for a quadratic; what remains is f32 rounding of
  // f near 25, bounded by ulp(25) / (2h) ~ 9.5e-4.
  auto g = finite_diff_gradient(sum_of_squares(), {{"x", Tensor::vector({3, 4})}},
                                "y", {"x"}, 1e-3f)
               .at("x");
  EXPECT_NEAR(g[0], 6.0f, 2e-3f);
  EXPECT_NEAR(g[1], 8.0f, 2e-3f);
}

TEST(FiniteDiff, ConstantProgramHasZeroGradient) {
  Program p({{"x", {3}}}, [](Tape& t, const NamedVars&) {
    return NamedVars{{"y", t.constant(Tensor::scalar(4.0f))}};
  });
  auto g = finite_diff_gradient(p, {{"x", Tensor::vector({1, 2, 3})}}, "y",
                                {"x"}, 1e-3f);
  EXPECT_EQ(g.at("x"), Tensor::zeros({3}));
}

TEST(FiniteDiff, LinearProgramIsExactUpToRounding) {
  Program p({{"x", {2}}}, [](Tape& t, const NamedVars& in) {
    return NamedVars{{"y", sum(mul(in.at("x"), t.constant(Tensor::vector({2, -1}))))}};
  });
  auto g = finite_diff_gradient(p, {{"x", Tensor::vector({0.5f, 0.25f})}}, "y",
                                {"x"}, 1e-3f)
               .at("x");
  EXPECT_NEAR(g[0], 2.0f, 1e-4f);
  EXPECT_NEAR(g[1], -1.0f, 1e-4f);
}

TEST(FiniteDiff, RejectsNonPositiveStep) {
  EXPECT_THROW(finite_diff_gradient(sum_of_squares(),
                                    {{"x", Tensor::vector({1})}}, "y", {"x"}, 0.0f),
               Error);
}

// Per-op checks against central differences. Inputs are kept away from the
// kinks of abs/relu.
TEST(OpGradients, MatchFiniteDifferences) {
  struct Case {
    const char* name;
    std::vector<InputSpec> sig;
    std::function<Var(const NamedVars&)> f;
  };
  std::vector<Case> cases = {
      {"matmul", {{"x", {3, 4}}, {"w", {4, 5}}},
       [](const NamedVars& in) { return matmul(in.at("x"), in.at("w")); }},
      {"bmm_t", {{"x", {2, 3, 4}}, {"w", {2, 5, 4}}},
       [](const NamedVars& in) { return bmm(in.at("x"), in.at("w"), true); }},
      {"bmm", {{"x", {2, 3, 4}}, {"w", {2, 4, 5}}},
       [](const NamedVars& in) { return bmm(in.at("x"), in.at("w")); }},
      {"broadcast_mul", {{"x", {3, 4}}, {"w", {4}}},
       [](const NamedVars& in) { return mul(in.at("x"), in.at("w")); }},
      {"broadcast_sub", {{"x", {3, 4}}, {"w", {4}}},
       [](const NamedVars& in) { return sub(in.at("x"), in.at("w")); }},
      {"layer_norm", {{"x", {3, 6}}, {"w", {6}}},
       [](const NamedVars& in) {
         return layer_norm(in.at("x"), in.at("w"), in.at("w"));
       }},
      {"softmax_gelu", {{"x", {3, 5}}, {"w", {5}}},
       [](const NamedVars& in) { return softmax(gelu(add(in.at("x"), in.at("w")))); }},
      {"permute_concat", {{"x", {2, 3, 4}}, {"w", {2, 3, 4}}},
       [](const NamedVars& in) {
         static constexpr std::size_t perm[] = {2, 0, 1};
         Var parts[] = {in.at("x"), in.at("w")};
         return permute(concat(parts, 1), perm);
       }},
      {"slice_mean_axis", {{"x", {2, 6, 3}}, {"w", {3}}},
       [](const NamedVars& in) {
         return mean_axis(mul(slice(in.at("x"), 1, 2, 3), in.at("w")), 1);
       }},
      {"sum_last_abs", {{"x", {4, 5}}, {"w", {5}}},
       [](const NamedVars& in) {
         return sum_last(abs(add(in.at("x"), in.at("w"))));
       }},
  };
  std::uint64_t seed = 1;
  for (const auto& c : cases) {
    Program p = projected(c.sig, c.f, seed * 31);
    NamedTensors in;
    for (const auto& s : c.sig) in[s.name] = random_tensor(s.shape, ++seed);
    for (const auto& s : c.sig) {
      auto r = check_gradient(p, in, "out", s.name, 64, seed, 1e-3f, 1.0);
      EXPECT_LT(r.max_rel_error, 1e-3) << c.name << " wrt " << s.name;
    }
  }
}

TEST(OpGradients, CrossEntropyAndEmbedding) {
  const int labels[] = {2, 0, 1};
  const int ids[] = {1, 3, 3};
  Program p({{"table", {4, 3}}}, [&](Tape&, const NamedVars& in) {
    return NamedVars{{"out", cross_entropy(embedding(in.at("table"), ids), labels)}};
  });
  NamedTensors in{{"table", random_tensor({4, 3}, 77)}};
  auto r = check_gradient(p, in, "out", "table", 12, 3, 1e-3f, 1.0);
  EXPECT_LT(r.max_rel_error, 1e-3);
}

TEST(EncoderBlock, GradientMatchesFiniteDifferences) {
  Rng rng(11);
  ParameterStore ps;
  init_encoder_block(ps, "blk", 8, 16, rng);
  Program p({{"x", {2, 3, 8}}}, [&ps](Tape& t, const NamedVars& in) {
    Bound b(t, ps, false);
    Var y = encoder_block(b, "blk", in.at("x"), 2);
    return NamedVars{{"out", sum(mul(y, t.constant(random_tensor(y.shape(), 4))))}};
  });
  auto r = check_gradient(p, {{"x", random_tensor({2, 3, 8}, 5)}}, "out", "x",
                          32, 6, 1e-3f, 1.0);
  EXPECT_LT(r.max_rel_error, 1e-3);
}

TEST(Blob, RecordRoundTripAndChecksum) {
  ParameterStore ps;
  ps.add("a", random_tensor({2, 3}, 1));
  ps.add("bias", random_tensor({7}, 2));
  auto path = std::filesystem::temp_directory_path() / "smoodi_blob_test.bin";
  save_checkpoint(path, "test v1 k=v", ps);
  Checkpoint ck = load_checkpoint(path);
  EXPECT_EQ(ck.header, "test v1 k=v");
  EXPECT_EQ(header_field(ck.header, "k"), "v");
  EXPECT_EQ(ck.params.checksum(), ps.checksum());
  EXPECT_EQ(ck.params.get("bias"), ps.get("bias"));
  std::filesystem::remove(path);
}

TEST(Blob, RecordLayoutIsLittleEndian) {
  std::ostringstream os;
  write_tensor_record(os, "ab", Tensor({2}, {1.0f, -2.0f}));
  const std::string s = os.str();
  ASSERT_EQ(s.size(), 4u + 2u + 4u + 4u + 8u);
  EXPECT_EQ(s.substr(0, 6), std::string("\x02\x00\x00\x00" "ab", 6));
  EXPECT_EQ(s.substr(6, 8), std::string("\x01\x00\x00\x00\x02\x00\x00\x00", 8));
  EXPECT_EQ(s.substr(14, 4), std::string("\x00\x00\x80\x3f", 4));
}

TEST(Program, ConcurrentEvaluationIsDeterministic) {
  Rng rng(3);
  ParameterStore ps;
  init_encoder_block(ps, "blk", 16, 32, rng);
  Program p({{"x", {-1, 5, 16}}}, [&ps](Tape& t, const NamedVars& in) {
    Bound b(t, ps, false);
    return NamedVars{{"y", encoder_block(b, "blk", in.at("x"), 2)}};
  });
  NamedTensors in{{"x", random_tensor({3, 5, 16}, 8)}};
  const Tensor ref = p.evaluate(in).at("y");
  std::vector<Tensor> outs(4);
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i)
    threads.emplace_back([&, i] { outs[i] = p.evaluate(in).at("y"); });
  for (auto& th : threads) th.join();
  for (const auto& o : outs) EXPECT_TRUE(bitwise_equal(o, ref));
}

TEST(AdamW, MinimizesQuadratic) {
  ParameterStore ps;
  ps.add("w", Tensor::vector({3.0f, -2.0f}));
  AdamW opt(ps, {"w"}, {.lr = 0.1f, .weight_decay = 0.0f});
  for (int i = 0; i < 300; ++i) {
    Tape t;
    Bound b(t, ps, true);
    Var loss = sum(square(b["w"]));
    t.backward(loss);
    opt.step(b.gradients());
  }
  EXPECT_NEAR(ps.get("w")[0], 0.0f, 1e-2f);
  EXPECT_NEAR(ps.get("w")[1], 0.0f, 1e-2f);
}
