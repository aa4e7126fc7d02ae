#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "rpop/lp.hpp"
#include "test_util.hpp"

using namespace rpop;
using namespace rpop::lp;
using rpop::test::uniform;
using rpop::test::uniform_int;

TEST_CASE("single variable lower bound") {
  LinearProgram p;
  p.add_var(-kInf, kInf, 1.0);
  p.add_row({{0, 1.0}}, Sense::GE, 3.0);
  auto sol = solve_lp(p);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.primal[0] == doctest::Approx(3.0));
  CHECK(sol.objective == doctest::Approx(3.0));
}

TEST_CASE("dual of a single active <= row is -1") {
  LinearProgram p;
  p.add_var(0.0, kInf, -1.0);
  p.add_var(0.0, kInf, -1.0);
  p.add_row({{0, 1.0}, {1, 1.0}}, Sense::LE, 1.0);
  auto sol = solve_lp(p);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(-1.0));
  CHECK(sol.duals[0] == doctest::Approx(-1.0));
  auto rep = dual_check(p, sol);
  CHECK(rep.pass);
  CHECK(rep.duality_gap <= 1e-7);
}

TEST_CASE("infeasible bounds produce a certificate") {
  LinearProgram p;
  p.add_var(-kInf, kInf, 0.0);
  p.add_row({{0, 1.0}}, Sense::GE, 1.0);
  p.add_row({{0, 1.0}}, Sense::LE, 0.0);
  auto sol = solve_lp(p);
  REQUIRE(sol.status == LpStatus::Infeasible);
  REQUIRE(sol.farkas.size() == 2);
  CHECK(rpop::test::farkas_valid(p, sol.farkas));
}

TEST_CASE("unbounded below yields an improving ray") {
  LinearProgram p;
  p.add_var(-kInf, kInf, 1.0);
  p.add_var(0.0, kInf, 0.0);
  p.add_row({{0, 1.0}, {1, -1.0}}, Sense::LE, 2.0);
  auto sol = solve_lp(p);
  REQUIRE(sol.status == LpStatus::Unbounded);
  REQUIRE(sol.ray.size() == 2);
  double obj_dir = sol.ray[0] * 1.0;
  CHECK(obj_dir < -1e-9);
  // Ray must respect the row sense.
  double row_dir = sol.ray[0] - sol.ray[1];
  CHECK(row_dir <= 1e-9);
}

TEST_CASE("degenerate equality pair still certifies") {
  // Redundant pair of equalities through the optimum.
  LinearProgram p;
  p.add_var(0.0, 10.0, 1.0);
  p.add_var(0.0, 10.0, 2.0);
  p.add_row({{0, 1.0}, {1, 1.0}}, Sense::EQ, 4.0);
  p.add_row({{0, 2.0}, {1, 2.0}}, Sense::EQ, 8.0);
  auto sol = solve_lp(p);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(4.0));
  auto rep = dual_check(p, sol);
  CHECK(rep.pass);
  CHECK(rep.duality_gap <= 1e-7);
}

TEST_CASE("perturbed primal fails dual_check") {
  LinearProgram p;
  p.add_var(0.0, kInf, -1.0);
  p.add_var(0.0, kInf, -1.0);
  p.add_row({{0, 1.0}, {1, 1.0}}, Sense::LE, 1.0);
  auto sol = solve_lp(p);
  REQUIRE(sol.status == LpStatus::Optimal);
  sol.primal[0] += 0.1;
  auto rep = dual_check(p, sol);
  CHECK_FALSE(rep.pass);
  CHECK(rep.worst_primal_residual > 1e-3);
}

TEST_CASE("fixed variables and bound flips") {
  LinearProgram p;
  p.add_var(2.0, 2.0, 5.0);       // fixed
  p.add_var(-1.0, 3.0, -2.0);     // wants its upper bound
  p.add_row({{0, 1.0}, {1, 1.0}}, Sense::LE, 10.0);
  auto sol = solve_lp(p);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.primal[0] == doctest::Approx(2.0));
  CHECK(sol.primal[1] == doctest::Approx(3.0));
  CHECK(sol.objective == doctest::Approx(4.0));
}

TEST_CASE("vertex oracle agreement on random small LPs") {
  std::mt19937_64 rng(20240811u);
  int infeasible_seen = 0;
  for (int trial = 0; trial < 400; ++trial) {
    int n = uniform_int(rng, 1, 3);
    int m = uniform_int(rng, 1, 6);
    LinearProgram p;
    for (int j = 0; j < n; ++j) {
      double lo = uniform(rng, -4.0, 0.0);
      double hi = lo + uniform(rng, 0.0, 6.0);
      p.add_var(lo, hi, uniform(rng, -3.0, 3.0));
    }
    for (int r = 0; r < m; ++r) {
      std::vector<Entry> coeffs;
      for (int j = 0; j < n; ++j) {
        double v = uniform(rng, -2.0, 2.0);
        if (std::abs(v) > 0.3) coeffs.push_back({j, v});
      }
      if (coeffs.empty()) coeffs.push_back({0, 1.0});
      double rhs = uniform(rng, -3.0, 3.0);
      int s = uniform_int(rng, 0, 2);
      Sense sense = s == 0 ? Sense::LE : (s == 1 ? Sense::GE : Sense::EQ);
      // Equalities make most random instances infeasible; keep a few.
      if (sense == Sense::EQ && uniform(rng, 0, 1) < 0.7) sense = Sense::LE;
      p.add_row(std::move(coeffs), sense, rhs);
    }

    auto expected = rpop::test::VertexOracle::min_objective(p);
    auto sol = solve_lp(p);
    if (!expected.has_value()) {
      ++infeasible_seen;
      REQUIRE(sol.status == LpStatus::Infeasible);
      CHECK(rpop::test::farkas_valid(p, sol.farkas));
    } else {
      REQUIRE(sol.status == LpStatus::Optimal);
      CHECK(sol.objective == doctest::Approx(*expected).epsilon(1e-8));
    }
  }
  CHECK(infeasible_seen > 10);  // the generator must exercise both paths
}

TEST_CASE("strong duality on 1000 random feasible LPs") {
  std::mt19937_64 rng(777123u);
  for (int trial = 0; trial < 1000; ++trial) {
    int n = uniform_int(rng, 2, 30);
    int m = uniform_int(rng, 1, 40);
    LinearProgram p;
    std::vector<double> xhat(n);
    for (int j = 0; j < n; ++j) {
      double lo = uniform(rng, -5.0, 0.0);
      double hi = lo + uniform(rng, 0.1, 8.0);
      p.add_var(lo, hi, uniform(rng, -4.0, 4.0));
      xhat[j] = uniform(rng, lo, hi);
    }
    for (int r = 0; r < m; ++r) {
      std::vector<Entry> coeffs;
      double act = 0.0;
      for (int j = 0; j < n; ++j) {
        if (uniform(rng, 0, 1) < 0.4) {
          double v = uniform(rng, -5.0, 5.0);
          coeffs.push_back({j, v});
          act += v * xhat[j];
        }
      }
      if (coeffs.empty()) continue;
      int s = uniform_int(rng, 0, 2);
      if (s == 0)
        p.add_row(std::move(coeffs), Sense::LE, act + uniform(rng, 0.0, 2.0));
      else if (s == 1)
        p.add_row(std::move(coeffs), Sense::GE, act - uniform(rng, 0.0, 2.0));
      else
        p.add_row(std::move(coeffs), Sense::EQ, act);
    }
    auto sol = solve_lp(p);
    REQUIRE(sol.status == LpStatus::Optimal);
    auto rep = dual_check(p, sol);
    REQUIRE_MESSAGE(rep.pass, "trial ", trial, " gap=", rep.duality_gap, " primal=",
                    rep.worst_primal_residual, " dual=", rep.worst_dual_residual);
    REQUIRE(rep.duality_gap <= 1e-7);
    REQUIRE(rep.worst_primal_residual <= 1e-7);
  }
}

TEST_CASE("deterministic repeated solves") {
  std::mt19937_64 rng(5150u);
  LinearProgram p;
  int n = 12;
  for (int j = 0; j < n; ++j) p.add_var(uniform(rng, -3, 0), uniform(rng, 0, 3), uniform(rng, -2, 2));
  for (int r = 0; r < 15; ++r) {
    std::vector<Entry> coeffs;
    for (int j = 0; j < n; ++j)
      if (uniform(rng, 0, 1) < 0.5) coeffs.push_back({j, uniform(rng, -2, 2)});
    if (coeffs.empty()) continue;
    p.add_row(std::move(coeffs), Sense::LE, uniform(rng, 0.5, 4.0));
  }
  auto a = solve_lp(p);
  auto b = solve_lp(p);
  REQUIRE(a.status == b.status);
  if (a.status == LpStatus::Optimal) {
    CHECK(a.objective == b.objective);  // bit-identical path
    CHECK(a.iterations == b.iterations);
    for (size_t i = 0; i < a.primal.size(); ++i) CHECK(a.primal[i] == b.primal[i]);
  }
}

TEST_CASE("warm start reaches the same optimum faster") {
  std::mt19937_64 rng(424242u);
  LinearProgram p;
  int n = 20;
  for (int j = 0; j < n; ++j) p.add_var(0.0, 5.0, uniform(rng, -3, 3));
  for (int r = 0; r < 25; ++r) {
    std::vector<Entry> coeffs;
    for (int j = 0; j < n; ++j)
      if (uniform(rng, 0, 1) < 0.4) coeffs.push_back({j, uniform(rng, -2, 2)});
    if (coeffs.empty()) continue;
    p.add_row(std::move(coeffs), Sense::LE, uniform(rng, 1.0, 6.0));
  }
  SimplexOptions opt;
  Basis basis;
  auto cold = solve_lp(p, opt, nullptr, &basis);
  REQUIRE(cold.status == LpStatus::Optimal);

  // Perturb one rhs slightly and re-solve warm.
  p.rows[0].rhs += 0.01;
  Basis basis2;
  auto warm = solve_lp(p, opt, &basis, &basis2);
  auto scratch = solve_lp(p);
  REQUIRE(warm.status == LpStatus::Optimal);
  REQUIRE(scratch.status == LpStatus::Optimal);
  CHECK(warm.objective == doctest::Approx(scratch.objective).epsilon(1e-10));
  CHECK(warm.iterations <= scratch.iterations);
}

TEST_CASE("lazy rows match the full solve") {
  std::mt19937_64 rng(9090u);
  for (int trial = 0; trial < 50; ++trial) {
    int n = uniform_int(rng, 2, 8);
    LinearProgram p;
    for (int j = 0; j < n; ++j) p.add_var(-2.0, 2.0, uniform(rng, -3, 3));
    for (int r = 0; r < 20; ++r) {
      std::vector<Entry> coeffs;
      for (int j = 0; j < n; ++j)
        if (uniform(rng, 0, 1) < 0.5) coeffs.push_back({j, uniform(rng, -2, 2)});
      if (coeffs.empty()) continue;
      bool lazy = uniform(rng, 0, 1) < 0.6;
      p.add_row(std::move(coeffs), Sense::LE, uniform(rng, 0.2, 3.0), "", lazy);
    }
    SimplexOptions lazy_opt;
    SimplexOptions full_opt;
    full_opt.use_lazy_rows = false;
    auto a = solve_lp(p, lazy_opt);
    auto b = solve_lp(p, full_opt);
    REQUIRE(a.status == b.status);
    if (a.status == LpStatus::Optimal) {
      CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-9));
      auto rep = dual_check(p, a);
      CHECK(rep.pass);
    }
  }
}

TEST_CASE("dump renders rows and tags") {
  LinearProgram p;
  p.add_var(0.0, 1.0, 2.0, "x");
  p.add_row({{0, 1.0}}, Sense::LE, 0.5, "cap");
  std::ostringstream os;
  dump(p, os);
  auto text = os.str();
  CHECK(text.find("cap") != std::string::npos);
  CHECK(text.find("<= 0.5") != std::string::npos);
}
