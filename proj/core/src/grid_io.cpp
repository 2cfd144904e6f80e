#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "radgraph/errors.hpp"
#include "radgraph/sphere_chart.hpp"

namespace radgraph::chart {

namespace {

constexpr const char* kMagic = "radgraph-grid";
constexpr int kVersion = 1;

std::string next_line(std::istream& is, int& line_no) {
  std::string line;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    return line;
  }
  throw ParseError("unexpected end of grid file", line_no + 1, 1);
}

std::istringstream expect(std::istream& is, int& line_no, const std::string& key) {
  std::istringstream ls(next_line(is, line_no));
  std::string k;
  ls >> k;
  if (k != key) throw ParseError("expected '" + key + "', found '" + k + "'", line_no, 1);
  return ls;
}

Mask mask_from_members(const std::vector<std::vector<int>>& members, int n) {
  Mask m;
  m.lo.assign(static_cast<std::size_t>(n), std::numeric_limits<int>::max());
  m.hi.assign(static_cast<std::size_t>(n), std::numeric_limits<int>::min());
  for (const auto& idx : members)
    for (std::size_t d = 0; d < idx.size(); ++d) {
      m.lo[d] = std::min(m.lo[d], idx[d]);
      m.hi[d] = std::max(m.hi[d], idx[d]);
    }
  std::size_t total = 1;
  for (std::size_t d = 0; d < m.lo.size(); ++d) total *= static_cast<std::size_t>(m.hi[d] - m.lo[d] + 1);
  m.inside.assign(total, 0);
  for (const auto& idx : members) m.inside[m.flat(idx)] = 1;
  return m;
}

}  // namespace

void write_grid(std::ostream& os, const GraphField& field, const GridFileExtras& extras) {
  const Grid& g = *field.grid;
  const int n = g.dim();
  os << std::setprecision(17);
  os << kMagic << ' ' << kVersion << '\n';
  os << "chart " << to_string(g.chart().kind()) << '\n';
  os << "center";
  for (Eigen::Index i = 0; i < g.chart().center().size(); ++i) os << ' ' << g.chart().center()(i);
  os << '\n';
  os << "n " << n << '\n';
  os << "h " << g.spacing() << '\n';
  const DomainSpec& d = g.domain();
  if (d.kind == DomainSpec::Kind::Cap) {
    os << "domain cap " << d.theta0 << '\n';
  } else {
    os << "domain mask " << d.mask.size() << '\n';
    for (const auto& idx : d.mask) {
      for (std::size_t k = 0; k < idx.size(); ++k) os << (k ? " " : "") << idx[k];
      os << '\n';
    }
  }
  os << "representation " << to_string(field.rep) << '\n';
  if (extras.has_space_form) os << "space_form " << extras.space_form << '\n';
  os << "nodes " << g.size() << '\n';
  os << "# id class";
  for (int i = 0; i < n; ++i) os << " i" << i + 1;
  for (int i = 0; i < n; ++i) os << " y" << i + 1;
  os << " value\n";
  for (int id = 0; id < g.size(); ++id) {
    const Node& node = g.node(id);
    os << id << ' ' << to_string(node.cls);
    for (int i = 0; i < n; ++i) {
      if (node.lattice.empty())
        os << " *";
      else
        os << ' ' << node.lattice[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < n; ++i) os << ' ' << node.y(i);
    os << ' ' << field.values(id) << '\n';
  }
}

GraphField read_grid(std::istream& is, GridFileExtras* extras) {
  int line_no = 0;
  {
    auto ls = expect(is, line_no, kMagic);
    int version = 0;
    ls >> version;
    if (version != kVersion) throw ParseError("unsupported grid file version", line_no, 1);
  }
  std::string kind_name;
  expect(is, line_no, "chart") >> kind_name;
  const ChartKind kind = chart_kind_from_string(kind_name);

  std::vector<double> center;
  {
    auto ls = expect(is, line_no, "center");
    double c;
    while (ls >> c) center.push_back(c);
  }
  int n = 0;
  expect(is, line_no, "n") >> n;
  if (n < 1 || static_cast<int>(center.size()) != n + 1)
    throw ParseError("center must have n + 1 components", line_no, 1);
  double h = 0.0;
  expect(is, line_no, "h") >> h;

  const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(center.data(), n + 1);
  const Chart chart = kind == ChartKind::Gnomonic ? Chart::gnomonic(n, c) : Chart::plane_minus_one(n);

  GridPtr grid;
  {
    auto ls = expect(is, line_no, "domain");
    std::string dk;
    ls >> dk;
    if (dk == "cap") {
      double theta0 = 0.0;
      ls >> theta0;
      grid = build_cap_domain(theta0, h, chart);
    } else if (dk == "mask") {
      std::size_t count = 0;
      ls >> count;
      std::vector<std::vector<int>> members;
      for (std::size_t k = 0; k < count; ++k) {
        std::istringstream ms(next_line(is, line_no));
        std::vector<int> idx(static_cast<std::size_t>(n));
        for (auto& v : idx)
          if (!(ms >> v)) throw ParseError("bad mask entry", line_no, 1);
        members.push_back(idx);
      }
      grid = build_from_mask(mask_from_members(members, n), h, chart);
    } else {
      throw ParseError("unknown domain kind '" + dk + "'", line_no, 8);
    }
  }

  std::string rep_name;
  expect(is, line_no, "representation") >> rep_name;
  GraphField field = make_field(grid, representation_from_string(rep_name));

  std::istringstream ls(next_line(is, line_no));
  std::string key;
  ls >> key;
  if (key == "space_form") {
    int K = 0;
    ls >> K;
    if (extras) {
      extras->space_form = K;
      extras->has_space_form = true;
    }
    ls = std::istringstream(next_line(is, line_no));
    ls >> key;
  }
  if (key != "nodes") throw ParseError("expected 'nodes'", line_no, 1);
  int count = 0;
  ls >> count;
  if (count != grid->size()) throw ParseError("node count does not match the domain", line_no, 1);

  for (int k = 0; k < count; ++k) {
    std::istringstream ns(next_line(is, line_no));
    int id = 0;
    std::string cls;
    ns >> id >> cls;
    if (id != k) throw ParseError("node ids must be consecutive", line_no, 1);
    for (int i = 0; i < n; ++i) {
      std::string tok;
      ns >> tok;
    }
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) ns >> y(i);
    double value = 0.0;
    if (!(ns >> value)) throw ParseError("missing node value", line_no, 1);
    const Node& node = grid->node(id);
    if (cls != to_string(node.cls) || (y - node.y).norm() > 1e-12 * (1.0 + node.y.norm()))
      throw ParseError("node does not match the rebuilt grid", line_no, 1);
    field.values(id) = value;
  }
  return field;
}

}  // namespace radgraph::chart
