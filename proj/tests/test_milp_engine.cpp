#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "rpop/milp.hpp"
#include "test_util.hpp"

using namespace rpop;
using namespace rpop::lp;
using namespace rpop::milp;
using rpop::test::uniform;
using rpop::test::uniform_int;

namespace {

/// Exhaustive oracle: tries every assignment of the binaries, solves the LP
/// with them fixed, returns the best objective (nullopt if none feasible).
std::optional<double> enumerate_oracle(const MixedIntegerProgram& mip) {
  int k = static_cast<int>(mip.binary_vars.size());
  LinearProgram scratch = mip.lp;
  std::optional<double> best;
  for (long mask = 0; mask < (1L << k); ++mask) {
    for (int b = 0; b < k; ++b) {
      int var = mip.binary_vars[b];
      double v = (mask >> b) & 1 ? 1.0 : 0.0;
      scratch.lower[var] = v;
      scratch.upper[var] = v;
    }
    auto sol = solve_lp(scratch);
    if (sol.status == LpStatus::Optimal)
      if (!best || sol.objective < *best) best = sol.objective;
  }
  return best;
}

}  // namespace

TEST_CASE("single binary prefers its bound") {
  MixedIntegerProgram mip;
  mip.lp.add_var(0.0, 1.0, -1.0);
  mip.binary_vars = {0};
  auto sol = solve_milp(mip);
  REQUIRE(sol.status == MipStatus::Optimal);
  CHECK(sol.assignment[0] == doctest::Approx(1.0));
  CHECK(sol.objective == doctest::Approx(-1.0));
}

TEST_CASE("knapsack pair picks the heavier item") {
  MixedIntegerProgram mip;
  mip.lp.add_var(0.0, 1.0, -2.0);
  mip.lp.add_var(0.0, 1.0, -3.0);
  mip.lp.add_row({{0, 1.0}, {1, 1.0}}, Sense::LE, 1.0);
  mip.binary_vars = {0, 1};
  auto sol = solve_milp(mip);
  REQUIRE(sol.status == MipStatus::Optimal);
  CHECK(sol.assignment[0] == doctest::Approx(0.0));
  CHECK(sol.assignment[1] == doctest::Approx(1.0));
  CHECK(sol.objective == doctest::Approx(-3.0));
}

TEST_CASE("fractional relaxation forces branching") {
  // Relaxation gives -1.5 at x=y=0.75; integer optimum is -1.
  MixedIntegerProgram mip;
  mip.lp.add_var(0.0, 1.0, -1.0);
  mip.lp.add_var(0.0, 1.0, -1.0);
  mip.lp.add_row({{0, 2.0}, {1, 2.0}}, Sense::LE, 3.0);
  mip.binary_vars = {0, 1};
  auto sol = solve_milp(mip);
  REQUIRE(sol.status == MipStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(-1.0));
  CHECK(sol.node_count > 1);
}

TEST_CASE("infeasible integer system") {
  MixedIntegerProgram mip;
  mip.lp.add_var(0.0, 1.0, 1.0);
  mip.lp.add_var(0.0, 1.0, 1.0);
  // x + y = 1 and x + y >= 1.5 cannot hold.
  mip.lp.add_row({{0, 1.0}, {1, 1.0}}, Sense::EQ, 1.0);
  mip.lp.add_row({{0, 1.0}, {1, 1.0}}, Sense::GE, 1.5);
  mip.binary_vars = {0, 1};
  auto sol = solve_milp(mip);
  CHECK(sol.status == MipStatus::Infeasible);
}

TEST_CASE("oracle equivalence on 200 random MIPs") {
  std::mt19937_64 rng(313371u);
  for (int trial = 0; trial < 200; ++trial) {
    int nb = uniform_int(rng, 1, 10);
    int nc = uniform_int(rng, 0, 4);
    MixedIntegerProgram mip;
    for (int j = 0; j < nb; ++j) mip.lp.add_var(0.0, 1.0, uniform(rng, -4.0, 4.0));
    for (int j = 0; j < nc; ++j) {
      double lo = uniform(rng, -2.0, 0.0);
      mip.lp.add_var(lo, lo + uniform(rng, 0.0, 4.0), uniform(rng, -2.0, 2.0));
    }
    int rows = uniform_int(rng, 1, 6);
    int n = nb + nc;
    for (int r = 0; r < rows; ++r) {
      std::vector<Entry> coeffs;
      for (int j = 0; j < n; ++j)
        if (uniform(rng, 0, 1) < 0.6) coeffs.push_back({j, uniform(rng, -3.0, 3.0)});
      if (coeffs.empty()) continue;
      int s = uniform_int(rng, 0, 2);
      Sense sense = s == 0 ? Sense::LE : (s == 1 ? Sense::GE : Sense::EQ);
      if (sense == Sense::EQ && uniform(rng, 0, 1) < 0.7) sense = Sense::LE;
      mip.lp.add_row(std::move(coeffs), sense, uniform(rng, -2.0, 3.0));
    }
    for (int j = 0; j < nb; ++j) mip.binary_vars.push_back(j);

    auto expected = enumerate_oracle(mip);
    auto sol = solve_milp(mip);
    if (!expected.has_value()) {
      REQUIRE(sol.status == MipStatus::Infeasible);
    } else {
      REQUIRE(sol.status == MipStatus::Optimal);
      REQUIRE_MESSAGE(std::abs(sol.objective - *expected) <= 1e-8 * (1 + std::abs(*expected)),
                      "trial ", trial, " got ", sol.objective, " expected ", *expected);
      // Incumbent must satisfy every row.
      for (const auto& row : mip.lp.rows) {
        double act = 0.0;
        for (const auto& e : row.coeffs) act += e.val * sol.assignment[e.col];
        double scale = 1.0 + std::abs(row.rhs);
        switch (row.sense) {
          case Sense::LE: CHECK(act <= row.rhs + 1e-7 * scale); break;
          case Sense::GE: CHECK(act >= row.rhs - 1e-7 * scale); break;
          case Sense::EQ: CHECK(std::abs(act - row.rhs) <= 1e-7 * scale); break;
        }
      }
      for (int j : mip.binary_vars) {
        double v = sol.assignment[j];
        CHECK(std::abs(v - std::round(v)) <= 1e-6);
      }
    }
  }
}

TEST_CASE("node log reports a non-decreasing global bound") {
  std::mt19937_64 rng(1999u);
  MixedIntegerProgram mip;
  int nb = 8;
  for (int j = 0; j < nb; ++j) mip.lp.add_var(0.0, 1.0, uniform(rng, -3.0, -0.5));
  for (int r = 0; r < 4; ++r) {
    std::vector<Entry> coeffs;
    for (int j = 0; j < nb; ++j) coeffs.push_back({j, uniform(rng, 0.2, 2.0)});
    mip.lp.add_row(std::move(coeffs), Sense::LE, uniform(rng, 1.0, 3.0));
  }
  for (int j = 0; j < nb; ++j) mip.binary_vars.push_back(j);

  std::ostringstream log;
  MipOptions opt;
  opt.log = &log;
  auto sol = solve_milp(mip, opt);
  REQUIRE(sol.status == MipStatus::Optimal);

  std::istringstream in(log.str());
  std::string word;
  double prev = -kInf;
  while (in >> word) {
    if (word == "bound") {
      double b;
      in >> b;
      CHECK(b >= prev - 1e-12);
      prev = b;
    }
  }
  CHECK(prev > -kInf);
}

TEST_CASE("deterministic node counts") {
  MixedIntegerProgram mip;
  for (int j = 0; j < 6; ++j) mip.lp.add_var(0.0, 1.0, -(1.0 + 0.1 * j));
  mip.lp.add_row({{0, 1.0}, {1, 1.0}, {2, 1.0}, {3, 1.0}, {4, 1.0}, {5, 1.0}}, Sense::LE, 2.5);
  for (int j = 0; j < 6; ++j) mip.binary_vars.push_back(j);
  auto a = solve_milp(mip);
  auto b = solve_milp(mip);
  REQUIRE(a.status == MipStatus::Optimal);
  CHECK(a.objective == b.objective);
  CHECK(a.node_count == b.node_count);
  for (size_t j = 0; j < a.assignment.size(); ++j) CHECK(a.assignment[j] == b.assignment[j]);
}
