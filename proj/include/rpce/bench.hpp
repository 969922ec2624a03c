#pragma once

// Benchmark models: polynomial sum, Ishigami, the varied-dimension function
// and a planar pin-jointed truss solved by the direct stiffness method.

#include <Eigen/Dense>
#include <json.hpp>

#include <array>
#include <charconv>
#include <functional>
#include <limits>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rpce/error.hpp"
#include "rpce/prob.hpp"
#include "rpce/sobol.hpp"

namespace rpce {

inline double poly_sum(double x1, double x2) { return 1.0 + x1 + x1 * x2 + x1 * x2 * x2 + x1 * x2 * x2 * x2; }

inline double ishigami(double x1, double x2, double x3, double a = 7.0, double b = 0.1) {
  const double s2 = std::sin(x2);
  return std::sin(x1) + a * s2 * s2 + b * std::pow(x3, 4) * std::sin(x1);
}

inline double varied_dim(std::span<const double> x) {
  const std::size_t m = x.size();
  if (m < 6) throw ParameterError("varied_dim needs M >= 6");
  double cubic = 0.0, quartic = 0.0;
  for (std::size_t k = 1; k <= m; ++k) {
    const double v = x[k - 1];
    cubic += static_cast<double>(k) * (v * v * v - 5.0 * v);
    quartic += static_cast<double>(k) * (v * v + v * v * v * v);
  }
  const double md = static_cast<double>(m);
  auto at = [&](std::size_t k) { return x[k - 1]; };
  return 3.0 + cubic / md + std::log(quartic / (3.0 * md)) + at(1) * at(2) * at(2) - at(3) * at(5) +
         at(2) * at(4) + at(m - 4) + at(m - 4) * at(m) * at(m);
}

// ---------------------------------------------------------------------------
// Truss

enum class BarGroup { Horizontal, Oblique };

struct TrussGeometry {
  struct Bar {
    int a, b;
    BarGroup group;
  };
  struct Support {
    int node;
    bool fix_x, fix_y;
  };
  std::vector<std::array<double, 2>> nodes;
  std::vector<Bar> bars;
  std::vector<Support> supports;
  std::vector<int> load_nodes;  // nodes receiving -P_1 .. -P_n (vertical)
  int output_node = -1;         // vertical displacement reported here

  void validate() const {
    const auto nn = static_cast<int>(nodes.size());
    auto check = [nn](int i) {
      if (i < 0 || i >= nn) throw ConfigurationError("truss: node index " + std::to_string(i) + " out of range");
    };
    for (const auto& b : bars) {
      check(b.a);
      check(b.b);
      if (b.a == b.b) throw ConfigurationError("truss: bar connects a node to itself");
    }
    for (const auto& s : supports) check(s.node);
    for (int i : load_nodes) check(i);
    check(output_node);
  }
};

/// 23-bar Warren truss: 24 m span in six 4 m bays, 2 m high, loads on the
/// six top-chord nodes, pinned at the left end and on a roller at the right.
inline TrussGeometry default_truss_geometry() {
  TrussGeometry g;
  for (int i = 0; i <= 6; ++i) g.nodes.push_back({4.0 * i, 0.0});        // 0..6 bottom chord
  for (int i = 0; i < 6; ++i) g.nodes.push_back({4.0 * i + 2.0, 2.0});  // 7..12 top chord
  for (int i = 0; i < 6; ++i) g.bars.push_back({i, i + 1, BarGroup::Horizontal});
  for (int i = 0; i < 5; ++i) g.bars.push_back({7 + i, 8 + i, BarGroup::Horizontal});
  for (int i = 0; i < 6; ++i) {
    g.bars.push_back({i, 7 + i, BarGroup::Oblique});
    g.bars.push_back({7 + i, i + 1, BarGroup::Oblique});
  }
  g.supports = {{0, true, true}, {6, false, true}};
  g.load_nodes = {7, 8, 9, 10, 11, 12};
  g.output_node = 3;
  return g;
}

inline TrussGeometry truss_geometry_from_json(const nlohmann::json& j) {
  try {
    TrussGeometry g;
    for (const auto& n : j.at("nodes")) g.nodes.push_back({n.at(0).get<double>(), n.at(1).get<double>()});
    for (const auto& b : j.at("bars")) {
      const std::string grp = b.at(2).get<std::string>();
      if (grp != "h" && grp != "o") throw ConfigurationError("truss: bar group must be \"h\" or \"o\"");
      g.bars.push_back({b.at(0).get<int>(), b.at(1).get<int>(), grp == "h" ? BarGroup::Horizontal : BarGroup::Oblique});
    }
    for (const auto& s : j.at("supports"))
      g.supports.push_back({s.at(0).get<int>(), s.at(1).get<bool>(), s.at(2).get<bool>()});
    g.load_nodes = j.at("load_nodes").get<std::vector<int>>();
    if (j.contains("output_node")) {
      g.output_node = j.at("output_node").get<int>();
    } else {
      // bottom-most node nearest to the horizontal centre
      double lo = g.nodes.at(0)[1], xmin = g.nodes[0][0], xmax = g.nodes[0][0];
      for (const auto& n : g.nodes) lo = std::min(lo, n[1]), xmin = std::min(xmin, n[0]), xmax = std::max(xmax, n[0]);
      const double mid = 0.5 * (xmin + xmax);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < g.nodes.size(); ++i)
        if (g.nodes[i][1] == lo && std::abs(g.nodes[i][0] - mid) < best) {
          best = std::abs(g.nodes[i][0] - mid);
          g.output_node = static_cast<int>(i);
        }
    }
    g.validate();
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("truss geometry JSON: ") + e.what());
  }
}

inline nlohmann::json to_json(const TrussGeometry& g) {
  nlohmann::json j;
  for (const auto& n : g.nodes) j["nodes"].push_back({n[0], n[1]});
  for (const auto& b : g.bars) j["bars"].push_back({b.a, b.b, b.group == BarGroup::Horizontal ? "h" : "o"});
  for (const auto& s : g.supports) j["supports"].push_back({s.node, s.fix_x, s.fix_y});
  j["load_nodes"] = g.load_nodes;
  j["output_node"] = g.output_node;
  return j;
}

/// Nodal displacements (u_x, u_y interleaved) for axial stiffness EA per bar
/// and nodal forces (f_x, f_y interleaved).
inline Eigen::VectorXd truss_displacements(const TrussGeometry& g, std::span<const double> ea,
                                           const Eigen::VectorXd& forces) {
  const auto ndof = static_cast<Eigen::Index>(2 * g.nodes.size());
  if (ea.size() != g.bars.size()) throw ShapeError("truss: one EA value per bar is required");
  if (forces.size() != ndof) throw ShapeError("truss: force vector length must be 2 x nodes");
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(ndof, ndof);
  for (std::size_t e = 0; e < g.bars.size(); ++e) {
    const auto& bar = g.bars[e];
    const double dx = g.nodes[static_cast<std::size_t>(bar.b)][0] - g.nodes[static_cast<std::size_t>(bar.a)][0];
    const double dy = g.nodes[static_cast<std::size_t>(bar.b)][1] - g.nodes[static_cast<std::size_t>(bar.a)][1];
    const double len = std::hypot(dx, dy);
    if (!(len > 0.0)) throw ConfigurationError("truss: zero-length bar");
    const double c = dx / len, s = dy / len;
    const Eigen::Vector4d t(-c, -s, c, s);
    const Eigen::Matrix4d ke = (ea[e] / len) * (t * t.transpose());
    const std::array<Eigen::Index, 4> dof{2 * bar.a, 2 * bar.a + 1, 2 * bar.b, 2 * bar.b + 1};
    for (int r = 0; r < 4; ++r)
      for (int q = 0; q < 4; ++q) k(dof[static_cast<std::size_t>(r)], dof[static_cast<std::size_t>(q)]) += ke(r, q);
  }
  std::vector<char> fixed(static_cast<std::size_t>(ndof), 0);
  for (const auto& s : g.supports) {
    if (s.fix_x) fixed[static_cast<std::size_t>(2 * s.node)] = 1;
    if (s.fix_y) fixed[static_cast<std::size_t>(2 * s.node + 1)] = 1;
  }
  std::vector<Eigen::Index> free;
  for (Eigen::Index d = 0; d < ndof; ++d)
    if (!fixed[static_cast<std::size_t>(d)]) free.push_back(d);
  const auto nf = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd kf(nf, nf);
  Eigen::VectorXd ff(nf);
  for (Eigen::Index r = 0; r < nf; ++r) {
    ff(r) = forces(free[static_cast<std::size_t>(r)]);
    for (Eigen::Index q = 0; q < nf; ++q) kf(r, q) = k(free[static_cast<std::size_t>(r)], free[static_cast<std::size_t>(q)]);
  }
  Eigen::VectorXd u = Eigen::VectorXd::Zero(ndof);
  if (nf == 0) return u;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(kf);
  const Eigen::VectorXd d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !(d.minCoeff() > 1e-12 * dmax))
    throw ConfigurationError("truss: global stiffness matrix is singular (the structure is a mechanism)");
  const Eigen::VectorXd uf = ldlt.solve(ff);
  for (Eigen::Index r = 0; r < nf; ++r) u(free[static_cast<std::size_t>(r)]) = uf(r);
  return u;
}

/// Vertical displacement of the output node (negative downward) for
/// params = (E_h, E_o, A_h, A_o, P_1, ..., P_n).
inline double truss_deflection(std::span<const double> params, const TrussGeometry& g = default_truss_geometry()) {
  if (params.size() != 4 + g.load_nodes.size())
    throw ShapeError("truss: expected " + std::to_string(4 + g.load_nodes.size()) + " parameters");
  const double eh = params[0], eo = params[1], ah = params[2], ao = params[3];
  if (!(eh > 0 && eo > 0 && ah > 0 && ao > 0)) throw DomainError("truss: moduli and areas must be positive");
  std::vector<double> ea;
  for (const auto& b : g.bars) ea.push_back(b.group == BarGroup::Horizontal ? eh * ah : eo * ao);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * g.nodes.size()));
  for (std::size_t i = 0; i < g.load_nodes.size(); ++i) f(2 * g.load_nodes[i] + 1) -= params[4 + i];
  return truss_displacements(g, ea, f)(2 * g.output_node + 1);
}

// ---------------------------------------------------------------------------
// Registry

struct BenchmarkModel {
  std::string name;
  InputModel input;
  BatchFunction evaluate;
  std::optional<SobolIndices> reference;
};

inline Eigen::VectorXd apply_rows(const Eigen::MatrixXd& x, const std::function<double(std::span<const double>)>& f) {
  Eigen::VectorXd y(x.rows());
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) row[static_cast<std::size_t>(c)] = x(r, c);
    y(r) = f(row);
  }
  return y;
}

inline BenchmarkModel polysum_benchmark() {
  return {"polysum", InputModel({Marginal::gaussian(0.0, 1.0), Marginal::gaussian(6.0, 1.0)}),
          [](const Eigen::MatrixXd& x) {
            return apply_rows(x, [](std::span<const double> r) { return poly_sum(r[0], r[1]); });
          },
          std::nullopt};
}

inline BenchmarkModel ishigami_benchmark(double a = 7.0, double b = 0.1) {
  const double pi = std::numbers::pi;
  return {"ishigami",
          InputModel({Marginal::uniform(-pi, pi), Marginal::uniform(-pi, pi), Marginal::uniform(-pi, pi)}),
          [a, b](const Eigen::MatrixXd& x) {
            return apply_rows(x, [a, b](std::span<const double> r) { return ishigami(r[0], r[1], r[2], a, b); });
          },
          analytic_ishigami(a, b)};
}

inline BenchmarkModel varied_dim_benchmark(int m) {
  if (m < 6) throw ParameterError("varied_dim needs M >= 6");
  std::vector<Marginal> ms(static_cast<std::size_t>(m), Marginal::uniform(1.0, 2.0));
  if (m >= 20) ms[19] = Marginal::uniform(1.0, 3.0);
  return {"varied_dim:" + std::to_string(m), InputModel(ms),
          [](const Eigen::MatrixXd& x) { return apply_rows(x, [](std::span<const double> r) { return varied_dim(r); }); },
          std::nullopt};
}

inline InputModel truss_input_model() {
  const Marginal e = Marginal::lognormal(2.1e11, 2.1e10);
  const Marginal p = Marginal::gumbel(5e4, 7.5e3);
  return InputModel({e, e, Marginal::lognormal(2e-3, 2e-4), Marginal::lognormal(1e-3, 1e-4), p, p, p, p, p, p});
}

inline BenchmarkModel truss_benchmark(TrussGeometry g = default_truss_geometry()) {
  g.validate();
  if (g.load_nodes.size() != 6) throw ConfigurationError("truss benchmark expects six load nodes");
  return {"truss", truss_input_model(),
          [g](const Eigen::MatrixXd& x) {
            return apply_rows(x, [&g](std::span<const double> r) { return truss_deflection(r, g); });
          },
          std::nullopt};
}

/// "polysum", "ishigami", "truss" or "varied_dim:M".
inline BenchmarkModel get_benchmark(const std::string& name) {
  if (name == "polysum") return polysum_benchmark();
  if (name == "ishigami") return ishigami_benchmark();
  if (name == "truss") return truss_benchmark();
  const std::string prefix = "varied_dim:";
  if (name.rfind(prefix, 0) == 0) {
    const std::string m = name.substr(prefix.size());
    int v = 0;
    const auto [ptr, ec] = std::from_chars(m.data(), m.data() + m.size(), v);
    if (ec != std::errc{} || ptr != m.data() + m.size()) throw ParameterError("bad dimension in benchmark '" + name + "'");
    return varied_dim_benchmark(v);
  }
  throw ParameterError("unknown benchmark '" + name + "' (polysum, ishigami, truss, varied_dim:M)");
}

}  // namespace rpce
