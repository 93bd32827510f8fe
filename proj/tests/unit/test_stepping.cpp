#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pbgfm/electrostatics.hpp"
#include "pbgfm/error.hpp"
#include "pbgfm/stepping.hpp"

using namespace pbgfm;

TEST_CASE("nonlinear substep fixed points") {
  CHECK(nonlinear_substep(0.0, 1.0, 0.1, 1.0) == 0.0);
  CHECK(nonlinear_substep(3.7, 0.0, 0.1, 1.0) == 3.7);
  CHECK(nonlinear_substep(-2.0, 1.0, 0.0, 0.5) == -2.0);
}

TEST_CASE("nonlinear substep matches RK4 integration") {
  CHECK(std::abs(nonlinear_substep(1.0, 1.0, 0.1, 1.0) - oracle::rk4_sinh(1.0, 1.0, 0.1, 1.0)) <= 1e-10);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> w(-6.0, 6.0), k2(0.0, 3.0), dt(0.0, 0.5);
  for (int draw = 0; draw < 100; ++draw) {
    const double w0 = w(rng), k = k2(rng), t = dt(rng), s = draw % 2 ? 1.0 : 0.5;
    const double got = nonlinear_substep(w0, k, t, s);
    CHECK(std::abs(got - oracle::rk4_sinh(w0, k, t, s)) <= 1e-10);
    CHECK(std::abs(got) <= std::abs(w0));
    CHECK(got * w0 >= 0.0);
  }
}

TEST_CASE("nonlinear substep stays finite for large arguments") {
  for (double w0 : {30.0, 200.0, 700.0, 1e4}) {
    const double got = nonlinear_substep(w0, 1.0, 1e-3, 1.0);
    CHECK(std::isfinite(got));
    CHECK(got <= w0);
    CHECK(got > 0.0);
    CHECK(nonlinear_substep(-w0, 1.0, 1e-3, 1.0) == -got);
  }
  // tiny w0 follows the linear decay
  CHECK(nonlinear_substep(1e-9, 2.0, 0.3, 1.0) == doctest::Approx(1e-9 * std::exp(-0.6)).epsilon(1e-12));
  CHECK(linear_substep(2.0, 2.0, 0.3, 0.5) == doctest::Approx(2.0 * std::exp(-0.3)));
}

namespace {

struct Small {
  AtomSet atoms;
  PhysicalParams params;
  Grid grid;
  InterfaceData iface;
  InterfaceOperator op;
  Field kappa;
  Field u;

  Small(std::size_t nodes, double h, double kappa_sq, std::uint64_t seed)
      : atoms({Atom{{0.1, -0.05, 0.07}, 1.0, 1.15}, Atom{{-0.3, 0.2, 0.1}, -0.4, 0.6}}),
        params(PhysicalParams::with_kappa_sq(2.0, 80.0, kappa_sq)),
        grid(Vec3{-h * (nodes - 1) / 2.0, -h * (nodes - 1) / 2.0, -h * (nodes - 1) / 2.0}, h, {nodes, nodes, nodes}),
        iface(classify_union(grid, atoms, 0.0)),
        op(iface, atoms, params),
        kappa(grid),
        u(grid) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> r(-3.0, 3.0);
    for (std::size_t n = 0; n < grid.size(); ++n) {
      kappa[n] = iface.inside(n) ? 0.0 : kappa_sq;
      u[n] = grid.is_boundary(n) ? dirichlet_boundary(atoms, grid.node(grid.unravel(n)), params) : r(rng);
    }
  }

  std::vector<std::size_t> interior() const {
    std::vector<std::size_t> ids;
    for (std::size_t n = 0; n < grid.size(); ++n)
      if (!grid.is_boundary(n)) ids.push_back(n);
    return ids;
  }
};

// Dense A_axis over interior unknowns plus the vector of boundary and jump terms.
struct DenseAxis {
  oracle::Matrix A;
  std::vector<double> bc;  // w * phi_b from Dirichlet neighbours
  std::vector<double> c;
};

DenseAxis dense_axis(const Small& s, Axis ax, const std::vector<std::size_t>& ids) {
  const std::size_t n = ids.size();
  std::vector<long> pos(s.grid.size(), -1);
  for (std::size_t i = 0; i < n; ++i) pos[ids[i]] = static_cast<long>(i);
  DenseAxis d{oracle::zeros(n, n), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  const auto w = s.op.weights(ax);
  const auto c = s.op.corrections(ax);
  const std::size_t st = s.grid.stride(ax);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t m = ids[i];
    d.c[i] = c[m];
    for (auto [nb, wt] : {std::pair{m - st, w[m - st]}, std::pair{m + st, w[m]}}) {
      d.A[i][i] -= wt;
      if (pos[nb] >= 0)
        d.A[i][static_cast<std::size_t>(pos[nb])] += wt;
      else
        d.bc[i] += wt * s.u[nb];
    }
  }
  return d;
}

oracle::Matrix shifted(const oracle::Matrix& A, double tau) {
  oracle::Matrix M = A;
  for (std::size_t i = 0; i < M.size(); ++i)
    for (std::size_t j = 0; j < M.size(); ++j) M[i][j] = (i == j ? 1.0 : 0.0) - tau * A[i][j];
  return M;
}

std::vector<double> gather(const Field& f, const std::vector<std::size_t>& ids) {
  std::vector<double> v;
  for (std::size_t n : ids) v.push_back(f[n]);
  return v;
}

}  // namespace

TEST_CASE("ADI step equals the dense three-factor update") {
  const Small s(7, 0.45, 0.8, 1);
  const auto ids = s.interior();
  const std::size_t n = ids.size();
  const double dt = 0.05;
  const DenseAxis X = dense_axis(s, Axis::X, ids), Y = dense_axis(s, Axis::Y, ids), Z = dense_axis(s, Axis::Z, ids);

  std::vector<double> v = gather(s.u, ids);
  for (std::size_t i = 0; i < n; ++i) v[i] = nonlinear_substep(v[i], s.kappa[ids[i]], dt, 1.0);
  const auto Ayv = oracle::matvec(Y.A, v), Azv = oracle::matvec(Z.A, v);
  std::vector<double> r1(n), r2(n), r3(n);
  for (std::size_t i = 0; i < n; ++i)
    r1[i] = v[i] + dt * (Ayv[i] + Y.bc[i] + Y.c[i] + Azv[i] + Z.bc[i] + Z.c[i]) + dt * (X.bc[i] + X.c[i]);
  const auto vs = oracle::dense_solve(shifted(X.A, dt), r1);
  for (std::size_t i = 0; i < n; ++i) r2[i] = vs[i] - dt * (Ayv[i] + Y.bc[i] + Y.c[i]) + dt * (Y.bc[i] + Y.c[i]);
  const auto vss = oracle::dense_solve(shifted(Y.A, dt), r2);
  for (std::size_t i = 0; i < n; ++i) r3[i] = vss[i] - dt * (Azv[i] + Z.bc[i] + Z.c[i]) + dt * (Z.bc[i] + Z.c[i]);
  const auto expected = oracle::dense_solve(shifted(Z.A, dt), r3);

  const Field got = adi_step(s.u, dt, s.op, s.kappa);
  CHECK(oracle::max_abs_diff(gather(got, ids), expected) <= 1e-12 * 100);
  for (std::size_t m = 0; m < s.grid.size(); ++m)
    if (s.grid.is_boundary(m)) CHECK(got[m] == s.u[m]);
}

TEST_CASE("LOD step equals the dense factor-by-factor update") {
  const Small s(7, 0.45, 0.8, 2);
  const auto ids = s.interior();
  const std::size_t n = ids.size();
  const double dt = 0.05, tau = 0.025;
  std::vector<double> v = gather(s.u, ids);
  for (std::size_t i = 0; i < n; ++i) v[i] = nonlinear_substep(v[i], s.kappa[ids[i]], dt, 0.5);
  for (Axis ax : kAxes) {
    const DenseAxis D = dense_axis(s, ax, ids);
    const auto Av = oracle::matvec(D.A, v);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = v[i] + tau * Av[i] + dt * (D.bc[i] + D.c[i]);
    v = oracle::dense_solve(shifted(D.A, tau), r);
  }
  for (std::size_t i = 0; i < n; ++i) v[i] = nonlinear_substep(v[i], s.kappa[ids[i]], dt, 0.5);
  const Field got = lod_step(s.u, dt, s.op, s.kappa);
  CHECK(oracle::max_abs_diff(gather(got, ids), v) <= 1e-12 * 100);
}

TEST_CASE("discrete steady state is a fixed point of ADI and nearly one of LOD") {
  Small s(9, 0.4, 0.0, 3);
  const auto ids = s.interior();
  const std::size_t n = ids.size();
  oracle::Matrix A = oracle::zeros(n, n);
  std::vector<double> rhs(n, 0.0);
  double c_max = 0.0;
  for (Axis ax : kAxes) {
    const DenseAxis D = dense_axis(s, ax, ids);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) A[i][j] += D.A[i][j];
      rhs[i] -= D.bc[i] + D.c[i];
      c_max = std::max(c_max, std::abs(D.c[i]));
    }
  }
  const auto steady = oracle::dense_solve(A, rhs);
  for (std::size_t i = 0; i < n; ++i) s.u[ids[i]] = steady[i];
  double u_max = 0.0;
  for (double x : steady) u_max = std::max(u_max, std::abs(x));

  const double dt = 0.01;
  const Field adi = adi_step(s.u, dt, s.op, s.kappa);
  CHECK(oracle::max_abs_diff(gather(adi, ids), steady) <= 1e-10 * std::max(1.0, u_max));
  const Field lod = lod_step(s.u, dt, s.op, s.kappa);
  CHECK(oracle::max_abs_diff(gather(lod, ids), steady) <= 5.0 * dt * c_max);
}

TEST_CASE("zero data stays zero") {
  const Grid g({-2, -2, -2}, 0.5, {9, 9, 9});
  const AtomSet atoms({Atom{{0, 0, 0}, 0.0, 1.0}});
  const PhysicalParams params = PhysicalParams::with_kappa_sq(1.0, 80.0, 1.0);
  const InterfaceData iface = classify_sphere(g, {0, 0, 0}, 1.0);
  const InterfaceOperator op(iface, atoms, params);
  Field kappa(g, 1.0);
  const Field zero(g);
  CHECK(adi_step(zero, 0.1, op, kappa) == zero);
  CHECK(lod_step(zero, 0.1, op, kappa) == zero);
  Field u(g);
  SplitStepper stepper(op, kappa, Scheme::ADI);
  CHECK_THROWS_AS(stepper.step(u, 0.0), ValidationError);
}

TEST_CASE("each sweep factor is solvable for any step") {
  const Small s(9, 0.4, 1.0, 4);
  for (double dt : {1e-6, 1e-2, 1.0, 1e3, 1e8}) {
    const Field a = adi_step(s.u, dt, s.op, s.kappa);
    const Field l = lod_step(s.u, dt, s.op, s.kappa);
    CHECK(a.all_finite());
    CHECK(l.all_finite());
  }
}
