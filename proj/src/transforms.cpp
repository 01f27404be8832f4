#include "hgf/transforms.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace hgf {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require_valid(const HierarchyTree& t) {
  const auto v = validate_hierarchy(t, t.num_vertices());
  if (!v.empty()) throw std::invalid_argument("invalid hierarchy: " + format_violation(v.front()));
}

}  // namespace

Coefficients decompose(const HierarchyTree& t, const Signal& f, int j0) {
  require_valid(t);
  if (f.rows() != t.num_vertices())
    throw std::invalid_argument("signal has " + std::to_string(f.rows()) + " rows, tree has " +
                                std::to_string(t.num_vertices()) + " leaves");
  const SystemLayout lay = make_layout(t, j0);
  const int K = t.num_levels();
  const Eigen::Index d = f.cols();

  Coefficients out;
  out.j0 = j0;
  out.x.resize(lay.num_scaling, d);
  out.y.resize(lay.num_vectors - lay.num_scaling, d);

  RowMatrix xs(t.size(), d);
  for (int id : t.level_nodes(K)) xs.row(id) = f.row(t.node(id).vertex);

  RowMatrix scaled;
  std::int64_t ops = 0;
  for (int j = K - 1; j >= j0; --j) {
    for (int id : t.level_nodes(j)) {
      const auto& kids = t.node(id).children;
      const int L = static_cast<int>(kids.size());
      const double c = 1.0 / std::sqrt(static_cast<double>(L));
      scaled.resize(L, d);
      for (int l = 0; l < L; ++l) scaled.row(l) = c * xs.row(kids[static_cast<std::size_t>(l)]);
      auto parent = xs.row(id);
      parent = scaled.row(0);
      for (int l = 1; l < L; ++l) parent += scaled.row(l);
      ops += (2 * L - 1) * d;
      const int base = lay.psi_column(t, id, 1) - lay.num_scaling;
      int m = 0;
      for (int l1 = 0; l1 < L; ++l1)
        for (int l2 = l1 + 1; l2 < L; ++l2, ++m) out.y.row(base + m) = scaled.row(l1) - scaled.row(l2);
      ops += m * d;
    }
  }
  for (int id : t.level_nodes(j0)) out.x.row(lay.level_row[static_cast<std::size_t>(id)]) = xs.row(id);
  out.ops = ops;
  return out;
}

Signal reconstruct(const HierarchyTree& t, const Coefficients& c, std::int64_t* ops_out) {
  require_valid(t);
  const SystemLayout lay = make_layout(t, c.j0);
  const int K = t.num_levels();
  if (c.x.rows() != lay.num_scaling || c.y.rows() != lay.num_vectors - lay.num_scaling || c.y.cols() != c.x.cols())
    throw std::invalid_argument("coefficients do not match the tree and j0");
  const Eigen::Index d = c.x.cols();

  RowMatrix xs(t.size(), d);
  for (int id : t.level_nodes(c.j0)) xs.row(id) = c.x.row(lay.level_row[static_cast<std::size_t>(id)]);

  RowMatrix acc;
  std::int64_t ops = 0;
  for (int j = c.j0; j < K; ++j) {
    for (int id : t.level_nodes(j)) {
      const auto& kids = t.node(id).children;
      const int L = static_cast<int>(kids.size());
      const double s = 1.0 / std::sqrt(static_cast<double>(L));
      acc.resize(L, d);
      acc.rowwise() = xs.row(id);
      const int base = lay.psi_column(t, id, 1) - lay.num_scaling;
      int m = 0;
      for (int l1 = 0; l1 < L; ++l1)
        for (int l2 = l1 + 1; l2 < L; ++l2, ++m) {
          acc.row(l1) += c.y.row(base + m);
          acc.row(l2) -= c.y.row(base + m);
        }
      for (int l = 0; l < L; ++l) xs.row(kids[static_cast<std::size_t>(l)]) = s * acc.row(l);
      ops += (2 * m + L) * d;
    }
  }
  Signal f(t.num_vertices(), d);
  for (int id : t.level_nodes(K)) f.row(t.node(id).vertex) = xs.row(id);
  if (ops_out) *ops_out = ops;
  return f;
}

Signal project_level(const FrameletSystem& s, int j, const Signal& X) {
  if (X.rows() != s.num_nodes()) throw std::invalid_argument("signal row count does not match the system");
  if (s.j0() != 1) throw std::invalid_argument("level projections need a system built with j0 = 1");
  if (j < 0 || j >= s.num_levels())
    throw std::out_of_range("projection level must lie in [0, " + std::to_string(s.num_levels() - 1) + "]");
  const SparseMatrix& m = j == 0 ? s.phi(1) : s.psi(j);
  const Signal coeffs = m * X;
  Signal out(X.rows(), X.cols());
  out.noalias() = m.transpose() * coeffs;
  return out;
}

SparsityReport sparsity_report(const HierarchyTree& t, const Signal& f, int j0, double eps) {
  if (f.cols() != 1) throw std::invalid_argument("sparsity report takes a single-column signal");
  const Coefficients c = decompose(t, f, j0);
  SparsityReport r;
  r.signal_nonzeros = static_cast<int>((f.array().abs() > eps).count());
  r.framelet_nonzeros = static_cast<int>((c.y.array().abs() > eps).count());
  r.scaling_nonzeros = static_cast<int>((c.x.array().abs() > eps).count());
  r.levels = t.num_levels();
  r.max_children = t.max_children();
  r.framelet_bound = static_cast<long long>(r.levels - 1) * (r.max_children - 1) * r.signal_nonzeros;
  return r;
}

namespace {

using nlohmann::json;

json row_value(const Eigen::MatrixXd& m, Eigen::Index r) {
  if (m.cols() == 1) return m(r, 0);
  json arr = json::array();
  for (Eigen::Index k = 0; k < m.cols(); ++k) arr.push_back(m(r, k));
  return arr;
}

void set_row(Eigen::MatrixXd& m, Eigen::Index r, const json& v) {
  if (v.is_number()) {
    if (m.cols() != 1) throw std::runtime_error("coefficient width mismatch");
    m(r, 0) = v.get<double>();
  } else if (v.is_array() && static_cast<Eigen::Index>(v.size()) == m.cols()) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) m(r, k) = v[static_cast<std::size_t>(k)].get<double>();
  } else {
    throw std::runtime_error("coefficient value must be a number or an array of width d");
  }
}

}  // namespace

std::string coefficients_to_json(const HierarchyTree& t, const Coefficients& c) {
  const SystemLayout lay = make_layout(t, c.j0);
  json xs = json::array(), ys = json::array();
  for (int id : t.level_nodes(c.j0))
    xs.push_back({{"path", t.node(id).path}, {"v", row_value(c.x, lay.level_row[static_cast<std::size_t>(id)])}});
  for (int j = c.j0; j < t.num_levels(); ++j)
    for (int id : t.level_nodes(j)) {
      const int L = t.num_children(id);
      for (int m = 1; m <= L * (L - 1) / 2; ++m)
        ys.push_back({{"path", t.node(id).path},
                      {"m", m},
                      {"v", row_value(c.y, lay.psi_column(t, id, m) - lay.num_scaling)}});
    }
  return json{{"j0", c.j0}, {"x", std::move(xs)}, {"y", std::move(ys)}}.dump();
}

Coefficients coefficients_from_json(const HierarchyTree& t, const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("coefficients JSON: ") + e.what());
  }
  if (!j.contains("j0") || !j.contains("x") || !j.contains("y"))
    throw std::runtime_error("coefficients JSON needs 'j0', 'x' and 'y'");
  Coefficients c;
  c.j0 = j["j0"].get<int>();
  const SystemLayout lay = make_layout(t, c.j0);
  if (j["x"].size() != static_cast<std::size_t>(lay.num_scaling) ||
      j["y"].size() != static_cast<std::size_t>(lay.num_vectors - lay.num_scaling))
    throw std::runtime_error("coefficient count does not match the tree");
  Eigen::Index d = 1;
  if (!j["x"].empty() && j["x"][0]["v"].is_array()) d = static_cast<Eigen::Index>(j["x"][0]["v"].size());
  c.x = Eigen::MatrixXd::Zero(lay.num_scaling, d);
  c.y = Eigen::MatrixXd::Zero(lay.num_vectors - lay.num_scaling, d);

  std::map<std::vector<int>, int> by_path;
  for (int id = 0; id < t.size(); ++id) by_path[t.node(id).path] = id;
  auto lookup = [&](const json& e) {
    auto it = by_path.find(e.at("path").get<std::vector<int>>());
    if (it == by_path.end()) throw std::runtime_error("coefficient path not in tree");
    return it->second;
  };
  for (const auto& e : j["x"]) {
    const int id = lookup(e);
    if (t.node(id).level != c.j0) throw std::runtime_error("scaling coefficient not at level j0");
    set_row(c.x, lay.level_row[static_cast<std::size_t>(id)], e.at("v"));
  }
  for (const auto& e : j["y"]) {
    const int id = lookup(e);
    const int L = t.num_children(id);
    const int m = e.at("m").get<int>();
    if (m < 1 || m > L * (L - 1) / 2) throw std::runtime_error("framelet index m out of range");
    set_row(c.y, lay.psi_column(t, id, m) - lay.num_scaling, e.at("v"));
  }
  return c;
}

}  // namespace hgf
