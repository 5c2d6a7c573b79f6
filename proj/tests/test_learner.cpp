#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "oracles.hpp"
#include "simco/experiments.hpp"

using namespace simco;

namespace {

SyntheticInstance make_instance(std::uint64_t seed, Index m = 16, Index d = 32,
                                Index n = 78, Index s = 4) {
  SyntheticSpec spec;
  spec.m = m;
  spec.d = d;
  spec.n = n;
  spec.sparsity = s;
  RngState rng(seed);
  return gen_synthetic(spec, rng);
}

}  // namespace

TEST_CASE("method names round trip") {
  for (Method m : {Method::MOD, Method::KSVD, Method::SimCOPrimitive,
                   Method::SimCORegularized}) {
    auto back = method_from_name(method_name(m));
    REQUIRE(back.has_value());
    CHECK(*back == m);
  }
  CHECK(!method_from_name("nope").has_value());
}

TEST_CASE("mu schedule lookup") {
  std::vector<MuSchedulePoint> sched = {{0, 0.1}, {100, 0.01}, {200, 0.001}};
  CHECK(mu_at(sched, 0) == 0.1);
  CHECK(mu_at(sched, 99) == 0.1);
  CHECK(mu_at(sched, 100) == 0.01);
  CHECK(mu_at(sched, 250) == 0.001);
  CHECK(mu_at({}, 5) == 0.0);
}

TEST_CASE("condition_number basics") {
  SUBCASE("orthonormal submatrices") {
    Dictionary d{Matrix::Identity(4, 4)};
    SparsityPattern p;
    p.d = 4;
    p.n = 2;
    p.cols = {{0, 1}, {2, 3}};
    CHECK(condition_number(d, p) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("duplicated atom gives the infinity sentinel") {
    Matrix a(4, 3);
    a.col(0) = Vector::Unit(4, 0);
    a.col(1) = Vector::Unit(4, 0);
    a.col(2) = Vector::Unit(4, 1);
    Dictionary d{a};
    SparsityPattern p;
    p.d = 3;
    p.n = 1;
    p.cols = {{0, 1}};
    CHECK(std::isinf(condition_number(d, p)));
  }
  SUBCASE("synthetic ground truth has a moderate kappa") {
    SyntheticInstance inst = make_instance(1);
    const double k = condition_number(inst.d_true, inst.x_true.pattern);
    CHECK(k > 1.0);
    CHECK(k < 100.0);  // same order of magnitude as the handpicked 3.39
  }
}

TEST_CASE("learn with zero outer iterations returns the initial state") {
  SyntheticInstance inst = make_instance(2);
  LearnConfig cfg;
  cfg.outer_iters = 0;
  cfg.sparsity = 4;
  LearnResult r = learn(inst.y, 32, cfg);
  REQUIRE(r.trace.records.size() == 1);
  CHECK(r.trace.records[0].iter == 0);
  CHECK(residual_energy(r.dict, inst.y, r.coeffs) ==
        doctest::Approx(r.trace.records[0].f));
}

TEST_CASE("MOD and KSVD traces diverge after the first iteration") {
  SyntheticInstance inst = make_instance(3);
  LearnConfig cfg;
  cfg.outer_iters = 3;
  cfg.track_kappa = false;
  cfg.method = Method::MOD;
  LearnResult a = learn(inst.y, 32, cfg);
  cfg.method = Method::KSVD;
  LearnResult b = learn(inst.y, 32, cfg);
  CHECK(a.trace.records[0].f == b.trace.records[0].f);
  CHECK(a.trace.records[1].f != b.trace.records[1].f);
}

TEST_CASE("trace determinism") {
  SyntheticInstance inst = make_instance(4);
  LearnConfig cfg;
  cfg.method = Method::SimCORegularized;
  cfg.mu_schedule = {{0, 0.05}};
  cfg.outer_iters = 4;
  LearnResult a = learn(inst.y, 32, cfg);
  LearnResult b = learn(inst.y, 32, cfg);
  REQUIRE(a.trace.records.size() == b.trace.records.size());
  for (size_t k = 0; k < a.trace.records.size(); ++k) {
    CHECK(a.trace.records[k].f == b.trace.records[k].f);
    CHECK(a.trace.records[k].grad_max == b.trace.records[k].grad_max);
    CHECK(a.trace.records[k].kappa == b.trace.records[k].kappa);
  }
  CHECK((a.dict.a - b.dict.a).norm() == 0.0);
}

TEST_CASE("regularized SimCO improves f/n by an order of magnitude") {
  int wins = 0;
  const int seeds = 5;
  for (int s = 0; s < seeds; ++s) {
    SyntheticInstance inst = make_instance(40 + static_cast<std::uint64_t>(s));
    RngState ri(900 + static_cast<std::uint64_t>(s));
    Matrix init(16, 32);
    for (Index i = 0; i < 32; ++i) init.col(i) = stiefel_sample_uniform(16, ri);
    Dictionary d0{std::move(init)};
    LearnConfig cfg;
    cfg.method = Method::SimCORegularized;
    cfg.mu_schedule = {{0, 0.1}, {25, 0.01}, {50, 1e-3}, {75, 1e-4}};
    cfg.outer_iters = 100;
    cfg.track_kappa = false;
    cfg.seed = static_cast<std::uint64_t>(s);
    LearnResult r = learn(inst.y, 32, cfg, &d0);
    const double f0 = r.trace.records.front().f;
    const double f1 = r.trace.records.back().f;
    if (f1 * 10.0 <= f0) ++wins;
  }
  CHECK(wins * 2 > seeds);  // median improvement >= 10x
}

TEST_CASE("update stages never increase f at mu = 0") {
  SyntheticInstance inst = make_instance(5);
  RngState rng(6);
  Matrix init(16, 32);
  for (Index i = 0; i < 32; ++i) init.col(i) = stiefel_sample_uniform(16, rng);
  Dictionary d0{std::move(init)};
  UpdateSelection sel = UpdateSelection::all(d0, inst.y, inst.x_true);
  SparseCoeffs x0 = objective(d0, inst.y, inst.x_true.pattern, sel, 0.0).coeffs;
  for (Method m : {Method::MOD, Method::KSVD, Method::SimCOPrimitive}) {
    LearnConfig cfg;
    cfg.method = m;
    cfg.outer_iters = 8;
    cfg.track_kappa = false;
    LearnResult r = update_only(inst.y, d0, x0, cfg);
    for (size_t k = 1; k < r.trace.records.size(); ++k)
      CHECK(r.trace.records[k].f <=
            r.trace.records[k - 1].f * (1.0 + 1e-12) + 1e-12);
  }
}

TEST_CASE("csv format") {
  ConvergenceTrace t;
  t.records.push_back({0, 1.5, 1.5, 0.25, 2.0, 3.25, ""});
  TraceRecord inf_rec;
  inf_rec.iter = 1;
  inf_rec.kappa = std::numeric_limits<double>::infinity();
  t.records.push_back(inf_rec);
  std::istringstream in(t.to_csv());
  std::string line;
  std::getline(in, line);
  CHECK(line == "iter,f,f_reg,grad_max,kappa,ms");
  std::getline(in, line);
  CHECK(line.substr(0, 2) == "0,");
  std::getline(in, line);
  CHECK(line.find("inf") != std::string::npos);
}

TEST_CASE("refine_two_step composition identity") {
  SyntheticInstance inst = make_instance(7);
  LearnConfig cfg;
  cfg.outer_iters = 8;
  cfg.refine_split_iter = 5;
  cfg.mu_schedule = {{0, 0.1}};
  cfg.track_kappa = false;
  LearnResult r = refine_two_step(inst.y, 32, cfg);
  REQUIRE(static_cast<int>(r.trace.records.size()) == cfg.outer_iters + 1);

  // Phase 1 alone, then primitive from the handoff dictionary.
  LearnConfig p1 = cfg;
  p1.method = Method::SimCORegularized;
  p1.outer_iters = 5;
  LearnResult r1 = learn(inst.y, 32, p1);
  LearnConfig p2 = cfg;
  p2.method = Method::SimCOPrimitive;
  p2.outer_iters = 3;
  LearnResult r2 = learn(inst.y, 32, p2, &r1.dict);
  CHECK(r2.trace.records.back().f == r.trace.records.back().f);
  CHECK((r2.dict.a - r.dict.a).norm() == 0.0);
  // Trace iters are renumbered continuously.
  for (size_t k = 0; k < r.trace.records.size(); ++k)
    CHECK(r.trace.records[k].iter == static_cast<int>(k));
}

TEST_CASE("single_sweep visits codewords one at a time") {
  SyntheticInstance inst = make_instance(8, 8, 12, 30, 3);
  RngState rng(9);
  Matrix init(8, 12);
  for (Index i = 0; i < 12; ++i) init.col(i) = stiefel_sample_uniform(8, rng);
  Dictionary d0{std::move(init)};
  UpdateSelection sel = UpdateSelection::all(d0, inst.y, inst.x_true);
  SparseCoeffs x0 = objective(d0, inst.y, inst.x_true.pattern, sel, 0.0).coeffs;
  LearnConfig cfg;
  cfg.method = Method::SimCOPrimitive;
  cfg.outer_iters = 3;
  cfg.track_kappa = false;
  LearnResult all = update_only(inst.y, d0, x0, cfg);
  cfg.single_sweep = true;
  LearnResult sweep = update_only(inst.y, d0, x0, cfg);
  CHECK(all.trace.records[1].f != sweep.trace.records[1].f);
  for (size_t k = 1; k < sweep.trace.records.size(); ++k)
    CHECK(sweep.trace.records[k].f <= sweep.trace.records[k - 1].f * (1.0 + 1e-12));
}

TEST_CASE("stop rule halts on a stagnating objective") {
  SyntheticInstance inst = make_instance(10);
  LearnConfig cfg;
  cfg.method = Method::SimCOPrimitive;
  cfg.outer_iters = 100;
  cfg.use_stop_rule = true;
  cfg.f_rel_tol = 0.5;  // very loose: halts almost immediately
  cfg.track_kappa = false;
  LearnResult r = learn(inst.y, 32, cfg);
  CHECK(r.trace.records.size() < 100);
}
