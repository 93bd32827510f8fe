#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pbgfm/error.hpp"
#include "pbgfm/surface.hpp"

namespace pbgfm {

namespace {

constexpr const char* kMagic = "pbgfm-interface";

int encode(bool inside, SignConvention c) {
  const int native = inside ? -1 : 1;
  return c == SignConvention::Native ? native : -native;
}

}  // namespace

void export_interface(std::ostream& out, const InterfaceData& data, SignConvention convention) {
  const Grid& g = data.grid();
  const Vec3 lo = g.origin();
  const Vec3 hi = g.upper();
  const auto& n = g.dims();
  const auto old_precision = out.precision(17);

  out << kMagic << " 1\n";
  out << "box " << lo.x << ' ' << lo.y << ' ' << lo.z << ' ' << hi.x << ' ' << hi.y << ' ' << hi.z << '\n';
  out << "n " << n[0] << ' ' << n[1] << ' ' << n[2] << '\n';
  out << "h " << g.spacing() << '\n';
  out << "convention " << (convention == SignConvention::Native ? "native" : "eses") << '\n';

  for (std::size_t k = 0; k < n[2]; ++k)
    for (std::size_t j = 0; j < n[1]; ++j) {
      out << "row " << j << ' ' << k;
      std::size_t i = 0;
      while (i < n[0]) {
        const bool v = data.inside(g.index(i, j, k));
        std::size_t run = 1;
        while (i + run < n[0] && data.inside(g.index(i + run, j, k)) == v) ++run;
        out << ' ' << encode(v, convention) << ':' << run;
        i += run;
      }
      out << '\n';
    }

  for (Axis axis : kAxes)
    for (const Crossing& c : data.crossings(axis))
      out << "cross " << axis_name(axis) << ' ' << c.low.i << ' ' << c.low.j << ' ' << c.low.k << ' ' << c.theta
          << '\n';
  out << "end\n";
  out.precision(old_precision);
  if (!out) throw IoError("failed writing interface file");
}

std::string export_interface(const InterfaceData& data, SignConvention convention) {
  std::ostringstream out;
  export_interface(out, data, convention);
  return out.str();
}

namespace {

struct Reader {
  std::vector<std::string> tokens;
  std::size_t line = 0;

  [[noreturn]] void fail(const std::string& what) const { throw FormatError(what, line); }

  double number(std::size_t t) const {
    if (t >= tokens.size()) fail("missing field");
    double v;
    const std::string& s = tokens[t];
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail("malformed number '" + s + "'");
    return v;
  }

  std::size_t count(std::size_t t) const {
    if (t >= tokens.size()) fail("missing field");
    std::size_t v;
    const std::string& s = tokens[t];
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail("malformed integer '" + s + "'");
    return v;
  }

  void expect_fields(std::size_t lo, std::size_t hi) const {
    if (tokens.size() < lo || tokens.size() > hi) fail("wrong number of fields for '" + tokens[0] + "'");
  }
};

struct PendingCrossing {
  Axis axis;
  Index3 low;
  double theta;
  std::size_t line;
};

Axis parse_axis(const Reader& r, const std::string& s) {
  if (s == "x") return Axis::X;
  if (s == "y") return Axis::Y;
  if (s == "z") return Axis::Z;
  r.fail("unknown axis '" + s + "'");
}

}  // namespace

InterfaceData import_interface(std::istream& in) {
  Reader r;
  std::string text;
  bool have_magic = false, have_box = false, have_n = false, have_h = false, have_end = false;
  SignConvention convention = SignConvention::Native;
  Vec3 box_lo, box_hi;
  std::array<std::size_t, 3> n{};
  double h = 0.0;
  std::vector<std::int8_t> node_state;  // -1 unassigned, 0 solvent, 1 solute
  std::size_t assigned = 0;
  std::vector<PendingCrossing> pending;
  std::size_t end_line = 0;

  auto require_dims = [&]() {
    if (!have_n) r.fail("node or crossing record before the 'n' header");
    if (node_state.empty()) node_state.assign(n[0] * n[1] * n[2], -1);
  };
  auto decode = [&](double v) -> std::int8_t {
    if (v != 1.0 && v != -1.0) r.fail("node value must be 1 or -1");
    const bool native_inside = v < 0.0;
    return (convention == SignConvention::Native ? native_inside : !native_inside) ? 1 : 0;
  };
  auto assign = [&](std::size_t i, std::size_t j, std::size_t k, std::int8_t state) {
    if (i >= n[0] || j >= n[1] || k >= n[2]) r.fail("node index outside the declared dimensions");
    auto& slot = node_state[i + n[0] * (j + n[1] * k)];
    if (slot != -1) r.fail("node assigned twice");
    slot = state;
    ++assigned;
  };

  while (std::getline(in, text)) {
    ++r.line;
    r.tokens.clear();
    std::istringstream fields(text);
    for (std::string t; fields >> t;) r.tokens.push_back(t);
    if (r.tokens.empty() || r.tokens[0][0] == '#') continue;
    if (have_end) r.fail("content after 'end'");
    const std::string& key = r.tokens[0];

    if (!have_magic) {
      if (key != kMagic) r.fail("missing 'pbgfm-interface' header");
      r.expect_fields(2, 2);
      if (r.count(1) != 1) r.fail("unsupported format version");
      have_magic = true;
    } else if (key == "box") {
      r.expect_fields(7, 7);
      for (int d = 0; d < 3; ++d) {
        box_lo[d] = r.number(1 + d);
        box_hi[d] = r.number(4 + d);
      }
      have_box = true;
    } else if (key == "n") {
      r.expect_fields(4, 4);
      if (have_n) r.fail("duplicate 'n' header");
      for (int d = 0; d < 3; ++d) n[d] = r.count(1 + d);
      have_n = true;
    } else if (key == "h") {
      r.expect_fields(2, 2);
      h = r.number(1);
      have_h = true;
    } else if (key == "convention") {
      r.expect_fields(2, 2);
      if (r.tokens[1] == "native")
        convention = SignConvention::Native;
      else if (r.tokens[1] == "eses")
        convention = SignConvention::Eses;
      else
        r.fail("unknown convention '" + r.tokens[1] + "'");
    } else if (key == "row") {
      require_dims();
      if (r.tokens.size() < 4) r.fail("row record needs j, k and at least one run");
      const std::size_t j = r.count(1), k = r.count(2);
      std::size_t i = 0;
      for (std::size_t t = 3; t < r.tokens.size(); ++t) {
        const std::string& run = r.tokens[t];
        const auto colon = run.find(':');
        if (colon == std::string::npos) r.fail("run must be value:count");
        Reader sub{{run.substr(0, colon), run.substr(colon + 1)}, r.line};
        const std::int8_t state = decode(sub.number(0));
        const std::size_t len = sub.count(1);
        for (std::size_t m = 0; m < len; ++m) assign(i++, j, k, state);
      }
      if (i != n[0]) r.fail("row length does not match Nx");
    } else if (key == "node") {
      require_dims();
      r.expect_fields(5, 5);
      assign(r.count(1), r.count(2), r.count(3), decode(r.number(4)));
    } else if (key == "cross") {
      require_dims();
      r.expect_fields(6, 9);
      const Axis axis = parse_axis(r, r.tokens[1]);
      const Index3 low{r.count(2), r.count(3), r.count(4)};
      const int a = to_int(axis);
      if (low.i >= n[0] || low.j >= n[1] || low.k >= n[2] || low[a] + 1 >= n[a])
        r.fail("crossing edge outside the declared dimensions");
      pending.push_back({axis, low, r.number(5), r.line});
    } else if (key == "end") {
      have_end = true;
      end_line = r.line;
    } else {
      r.fail("unknown record '" + key + "'");
    }
  }
  ++r.line;
  if (!have_magic) r.fail("empty interface file");
  if (!have_end) r.fail("truncated file: missing 'end'");
  r.line = end_line;
  if (!have_box || !have_n || !have_h) r.fail("missing box, n or h header");
  require_dims();
  if (assigned != node_state.size()) r.fail("node classification incomplete");

  for (int d = 0; d < 3; ++d) {
    const double expected = box_lo[d] + h * static_cast<double>(n[d] - 1);
    if (std::abs(expected - box_hi[d]) > 1e-9 * std::max(1.0, std::abs(box_hi[d])))
      r.fail("box extent does not match n and h");
  }

  Grid grid = [&] {
    try {
      return Grid(box_lo, h, n);
    } catch (const ValidationError& e) {
      r.fail(e.what());
    }
  }();

  std::vector<std::uint8_t> inside(node_state.begin(), node_state.end());
  std::array<std::vector<Crossing>, 3> crossings;
  for (const PendingCrossing& p : pending) {
    const std::size_t idx = grid.index(p.low);
    if (inside[idx] == inside[idx + grid.stride(p.axis)])
      throw FormatError("crossing references two nodes on the same side", p.line);
    if (!(p.theta >= kThetaMin && p.theta <= kThetaMax))
      throw FormatError("crossing fraction outside [1e-6, 1-1e-6]", p.line);
    crossings[to_int(p.axis)].push_back(make_crossing(grid, p.axis, p.low, p.theta));
  }
  try {
    return InterfaceData(grid, std::move(inside), std::move(crossings));
  } catch (const ValidationError& e) {
    r.fail(e.what());
  }
}

InterfaceData import_interface(const std::string& text) {
  std::istringstream in(text);
  return import_interface(in);
}

}  // namespace pbgfm
