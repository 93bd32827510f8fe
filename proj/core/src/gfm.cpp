#include "pbgfm/gfm.hpp"

#include <cmath>
#include <string>

#include "pbgfm/error.hpp"

namespace pbgfm {

void LineSystem::check_invariants() const {
  if (w.size() != corr.size() + 1) throw ValidationError("line system sizes disagree");
  for (double x : w)
    if (!(x >= 0.0) || !std::isfinite(x)) throw ValidationError("edge weight must be finite and nonnegative");
  for (double x : corr)
    if (!std::isfinite(x)) throw ValidationError("non-finite jump correction");
}

LineSystem assemble_line(std::span<const std::uint8_t> inside, double eps_in, double eps_out, double h,
                         std::span<const LineCrossing> crossings, double bc_lo, double bc_hi) {
  const std::size_t n = inside.size();
  if (n < 3) throw ValidationError("a line needs at least 3 nodes");
  if (!(eps_in > 0.0) || !(eps_out > 0.0)) throw ValidationError("permittivities must be positive");
  if (!(h > 0.0)) throw ValidationError("spacing must be positive");

  LineSystem sys;
  sys.w.resize(n - 1);
  sys.corr.assign(n - 2, 0.0);
  sys.bc_lo = bc_lo;
  sys.bc_hi = bc_hi;
  const double h2 = h * h;
  auto eps_of = [&](std::size_t m) { return inside[m] ? eps_in : eps_out; };
  for (std::size_t e = 0; e + 1 < n; ++e) sys.w[e] = eps_of(e) / h2;

  std::vector<std::uint8_t> seen(n - 1, 0);
  for (const LineCrossing& x : crossings) {
    const std::size_t e = x.edge;
    if (e + 1 >= n) throw ValidationError("crossing edge outside the line");
    if (inside[e] == inside[e + 1]) throw ValidationError("crossing on an edge without a side change");
    if (seen[e]) throw ValidationError("two crossings on one edge");
    seen[e] = 1;
    const double theta = x.theta;
    if (!(theta >= kThetaMin && theta <= kThetaMax)) throw ValidationError("interface fraction outside clamp range");
    if (!std::isfinite(x.jump.a) || !std::isfinite(x.jump.b)) throw ValidationError("crossing without finite jump data");

    const double eps_l = eps_of(e), eps_r = eps_of(e + 1);
    const double eps_hat = eps_l * eps_r / (eps_r * theta + eps_l * (1.0 - theta));
    const double w = eps_hat / h2;
    sys.w[e] = w;

    // Jump of the right-side profile minus the left-side profile.
    const double sgn = inside[e] ? 1.0 : -1.0;
    const double J = sgn * x.jump.a;
    const double K = sgn * x.jump.b;
    const double c_left = -w * J - eps_hat * (1.0 - theta) * K / (h * eps_r);
    const double c_right = w * J - eps_hat * theta * K / (h * eps_l);
    if (e >= 1) sys.corr[e - 1] += c_left;
    if (e + 2 < n) sys.corr[e] += c_right;
  }
  for (std::size_t e = 0; e + 1 < n; ++e)
    if (inside[e] != inside[e + 1] && !seen[e]) throw ValidationError("side change without a crossing");
  return sys;
}

void solve_shifted_lines(const double* w, double* x, double* cp, std::size_t stride, std::size_t len,
                         std::size_t batch, double tau) noexcept {
  for (std::size_t b = 0; b < batch; ++b) cp[b] = 0.0;
  for (std::size_t m = 1; m + 1 < len; ++m) {
    const std::size_t off = m * stride, prev = off - stride;
    for (std::size_t b = 0; b < batch; ++b) {
      const double wl = tau * w[prev + b], wr = tau * w[off + b];
      // cp lies in (-1, 0], so the pivot is at least 1.
      const double inv = 1.0 / (1.0 + wr + wl * (1.0 + cp[prev + b]));
      cp[off + b] = -wr * inv;
      x[off + b] = (x[off + b] + wl * x[prev + b]) * inv;
    }
  }
  for (std::size_t m = len - 2; m >= 1; --m) {
    const std::size_t off = m * stride, next = off + stride;
    for (std::size_t b = 0; b < batch; ++b) x[off + b] -= cp[off + b] * x[next + b];
  }
}

std::vector<double> thomas_solve(const LineSystem& sys, double tau, std::span<const double> rhs) {
  const std::size_t n = sys.interior();
  if (rhs.size() != n) throw ValidationError("right-hand side length does not match line");
  if (!(tau >= 0.0)) throw ValidationError("time step must be nonnegative");
  std::vector<double> x(n + 2, 0.0), cp(n + 2);
  std::copy(rhs.begin(), rhs.end(), x.begin() + 1);
  solve_shifted_lines(sys.w.data(), x.data(), cp.data(), 1, n + 2, 1, tau);
  return {x.begin() + 1, x.end() - 1};
}

std::vector<double> apply_operator(const LineSystem& sys, std::span<const double> v) {
  const std::size_t n = sys.interior();
  if (v.size() != n) throw ValidationError("vector length does not match line");
  std::vector<double> out(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double left = m == 0 ? sys.bc_lo : v[m - 1];
    const double right = m + 1 == n ? sys.bc_hi : v[m + 1];
    out[m] = sys.w[m] * (left - v[m]) + sys.w[m + 1] * (right - v[m]) + sys.corr[m];
  }
  return out;
}

JumpData jump_at(const Crossing& c, const AtomSet& atoms, const PhysicalParams& params) {
  const Vec3 grad = green_gradient(atoms, c.location, params);
  return {green_potential(atoms, c.location, params), params.eps_in * grad[to_int(c.axis)]};
}

InterfaceOperator::InterfaceOperator(const InterfaceData& interface, const AtomSet& atoms,
                                     const PhysicalParams& params)
    : grid_(interface.grid()) {
  params.validate();
  const auto& n = grid_.dims();
  const double h = grid_.spacing();
  std::vector<std::uint8_t> flags;
  std::vector<LineCrossing> line_crossings;
  for (Axis axis : kAxes) {
    const int a = to_int(axis);
    const std::size_t s = grid_.stride(axis);
    const std::size_t len = n[a];
    auto& w = w_[a];
    auto& corr = corr_[a];
    w.assign(grid_.size(), 0.0);
    corr.assign(grid_.size(), 0.0);
    flags.resize(len);
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    for (std::size_t ic = 0; ic < n[c]; ++ic)
      for (std::size_t ib = 0; ib < n[b]; ++ib) {
        Index3 start;
        start[b] = ib;
        start[c] = ic;
        const std::size_t base = grid_.index(start);
        line_crossings.clear();
        for (std::size_t m = 0; m < len; ++m) flags[m] = interface.inside(base + m * s) ? 1 : 0;
        for (std::size_t m = 0; m + 1 < len; ++m) {
          if (flags[m] == flags[m + 1]) continue;
          const Crossing* x = interface.find_crossing(axis, base + m * s);
          if (x == nullptr) throw ValidationError("sign-change edge without a crossing");
          line_crossings.push_back({m, x->theta, jump_at(*x, atoms, params)});
        }
        const LineSystem sys = assemble_line(flags, params.eps_in, params.eps_out, h, line_crossings, 0.0, 0.0);
        for (std::size_t m = 0; m + 1 < len; ++m) w[base + m * s] = sys.w[m];
        for (std::size_t m = 1; m + 1 < len; ++m) corr[base + m * s] = sys.corr[m - 1];
      }
  }
}

void InterfaceOperator::apply(Axis axis, const Field& v, Field& out, bool with_correction) const {
  const auto& n = grid_.dims();
  const std::size_t s = grid_.stride(axis);
  const double* w = w_[to_int(axis)].data();
  const double* corr = corr_[to_int(axis)].data();
  const double* in = v.values().data();
  double* o = out.values().data();
  std::fill(out.values().begin(), out.values().end(), 0.0);
  for (std::size_t k = 1; k + 1 < n[2]; ++k)
    for (std::size_t j = 1; j + 1 < n[1]; ++j) {
      const std::size_t row = grid_.index(0, j, k);
      for (std::size_t i = 1; i + 1 < n[0]; ++i) {
        const std::size_t m = row + i;
        const double c = with_correction ? corr[m] : 0.0;
        o[m] = w[m - s] * (in[m - s] - in[m]) + w[m] * (in[m + s] - in[m]) + c;
      }
    }
}

LineSystem InterfaceOperator::line(Axis axis, const Index3& start, const Field& u) const {
  const int a = to_int(axis);
  if (start[a] != 0) throw ValidationError("line start must have a zero coordinate along its axis");
  const std::size_t s = grid_.stride(axis);
  const std::size_t len = grid_.dims()[a];
  const std::size_t base = grid_.index(start);
  LineSystem sys;
  sys.w.resize(len - 1);
  sys.corr.resize(len - 2);
  for (std::size_t m = 0; m + 1 < len; ++m) sys.w[m] = w_[a][base + m * s];
  for (std::size_t m = 1; m + 1 < len; ++m) sys.corr[m - 1] = corr_[a][base + m * s];
  sys.bc_lo = u[base];
  sys.bc_hi = u[base + (len - 1) * s];
  return sys;
}

void InterfaceOperator::for_each_line(const Field& u,
                                      const std::function<void(Axis, const Index3&, const LineSystem&)>& fn) const {
  const auto& n = grid_.dims();
  for (Axis axis : kAxes) {
    const int a = to_int(axis);
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    for (std::size_t ic = 1; ic + 1 < n[c]; ++ic)
      for (std::size_t ib = 1; ib + 1 < n[b]; ++ib) {
        Index3 start;
        start[b] = ib;
        start[c] = ic;
        fn(axis, start, line(axis, start, u));
      }
  }
}

}  // namespace pbgfm
