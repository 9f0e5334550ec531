#include "avem/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "avem/errors.hpp"

namespace avem {

namespace {

template <typename T>
T expect(std::istream& is, const char* what) {
  T v;
  if (!(is >> v)) throw InvalidMesh(std::string("malformed input: expected ") + what);
  return v;
}

void expect_word(std::istream& is, const std::string& word) {
  const auto got = expect<std::string>(is, word.c_str());
  if (got != word) throw InvalidMesh("malformed input: expected '" + word + "', got '" + got + "'");
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw Error("cannot write " + p.string());
  return f;
}

const char* kRunHeader =
    "iter,ndof,estimator,err,eta_sum,xi_sum,sigma_sum,n_cells,cut_G_count,cut_K_count";

}  // namespace

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << std::setprecision(17);
  os << "VERTICES " << mesh.num_vertices() << '\n';
  for (const auto& v : mesh.vertices()) os << v.x() << ' ' << v.y() << '\n';
  os << "CELLS " << mesh.num_cells() << '\n';
  for (const auto& c : mesh.cells()) {
    os << c.size();
    for (int v : c) os << ' ' << v;
    os << '\n';
  }
}

Mesh read_mesh(std::istream& is) {
  expect_word(is, "VERTICES");
  const auto nv = expect<std::size_t>(is, "vertex count");
  std::vector<Point2d> vertices(nv);
  for (auto& v : vertices) {
    v.x() = expect<double>(is, "x");
    v.y() = expect<double>(is, "y");
  }
  expect_word(is, "CELLS");
  const auto nc = expect<std::size_t>(is, "cell count");
  std::vector<std::vector<int>> cells(nc);
  for (auto& c : cells) {
    c.resize(expect<std::size_t>(is, "cell size"));
    for (int& v : c) v = expect<int>(is, "vertex id");
  }
  return Mesh(std::move(vertices), std::move(cells));
}

void write_vtk(std::ostream& os, const Mesh& mesh, const std::vector<CellField>& cell_data,
               const std::string& title) {
  os << std::setprecision(17);
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& v : mesh.vertices()) os << v.x() << ' ' << v.y() << " 0\n";
  std::size_t total = 0;
  for (const auto& c : mesh.cells()) total += c.size() + 1;
  os << "CELLS " << mesh.num_cells() << ' ' << total << '\n';
  for (const auto& c : mesh.cells()) {
    os << c.size();
    for (int v : c) os << ' ' << v;
    os << '\n';
  }
  os << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) os << "7\n";
  if (cell_data.empty()) return;
  os << "CELL_DATA " << mesh.num_cells() << '\n';
  for (const auto& [name, values] : cell_data) {
    if (values.size() != mesh.num_cells())
      throw InvalidMesh("cell field '" + name + "' has the wrong length");
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : values) os << v << '\n';
  }
}

VtkGrid read_vtk(std::istream& is) {
  std::string line;
  std::getline(is, line);
  if (line.rfind("# vtk DataFile", 0) != 0) throw InvalidMesh("not a legacy VTK file");
  std::getline(is, line);  // title
  expect_word(is, "ASCII");
  expect_word(is, "DATASET");
  expect_word(is, "UNSTRUCTURED_GRID");

  VtkGrid g;
  expect_word(is, "POINTS");
  g.points.resize(expect<std::size_t>(is, "point count"));
  expect<std::string>(is, "point type");
  for (auto& p : g.points) {
    p.x() = expect<double>(is, "x");
    p.y() = expect<double>(is, "y");
    expect<double>(is, "z");
  }
  expect_word(is, "CELLS");
  g.cells.resize(expect<std::size_t>(is, "cell count"));
  expect<std::size_t>(is, "cell list size");
  for (auto& c : g.cells) {
    c.resize(expect<std::size_t>(is, "cell size"));
    for (int& v : c) v = expect<int>(is, "vertex id");
  }
  expect_word(is, "CELL_TYPES");
  if (expect<std::size_t>(is, "cell type count") != g.cells.size())
    throw InvalidMesh("CELL_TYPES count mismatch");
  for (std::size_t c = 0; c < g.cells.size(); ++c)
    if (expect<int>(is, "cell type") != 7) throw InvalidMesh("only polygon cells are supported");

  std::string word;
  if (!(is >> word)) return g;
  if (word != "CELL_DATA") throw InvalidMesh("unexpected section '" + word + "'");
  if (expect<std::size_t>(is, "cell data count") != g.cells.size())
    throw InvalidMesh("CELL_DATA count mismatch");
  while (is >> word) {
    if (word != "SCALARS") throw InvalidMesh("unexpected section '" + word + "'");
    CellField f;
    f.first = expect<std::string>(is, "field name");
    expect<std::string>(is, "field type");
    expect<int>(is, "component count");
    expect_word(is, "LOOKUP_TABLE");
    expect<std::string>(is, "table name");
    f.second.resize(g.cells.size());
    for (double& v : f.second) v = expect<double>(is, "field value");
    g.cell_data.push_back(std::move(f));
  }
  return g;
}

void write_run_csv(std::ostream& os, const std::vector<IterationRecord>& rows) {
  os << std::setprecision(17) << kRunHeader << '\n';
  for (const auto& r : rows)
    os << r.iter << ',' << r.ndof << ',' << r.estimator << ',' << r.err << ',' << r.eta_sum
       << ',' << r.xi_sum << ',' << r.sigma_sum << ',' << r.n_cells << ',' << r.cut_G_count
       << ',' << r.cut_K_count << '\n';
}

std::vector<IterationRecord> read_run_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kRunHeader) throw Error("run.csv: unexpected header");
  std::vector<IterationRecord> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    IterationRecord r;
    if (!(ls >> r.iter >> r.ndof >> r.estimator >> r.err >> r.eta_sum >> r.xi_sum >>
          r.sigma_sum >> r.n_cells >> r.cut_G_count >> r.cut_K_count))
      throw Error("run.csv: malformed row '" + line + "'");
    rows.push_back(r);
  }
  return rows;
}

double fit_rate(const std::vector<double>& ndof, const std::vector<double>& err, int burn_in) {
  if (ndof.size() != err.size()) throw InvalidConfig("fit_rate: column lengths differ");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = std::max(burn_in, 0); i < ndof.size(); ++i) {
    if (!(ndof[i] > 0 && err[i] > 0)) continue;
    const double x = std::log(ndof[i]), y = std::log(err[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y, ++n;
  }
  const double den = n * sxx - sx * sx;
  if (n < 2 || !(den > 0))
    throw InsufficientData("need at least two distinct rows after the burn-in to fit a rate");
  return (n * sxy - sx * sy) / den;
}

double fit_rate(const std::vector<IterationRecord>& rows, int burn_in) {
  std::vector<double> n, e;
  for (const auto& r : rows) {
    n.push_back(r.ndof);
    e.push_back(r.err);
  }
  return fit_rate(n, e, burn_in);
}

void CliConfig::validate() const {
  if (case_name != "1" && case_name != "2" && case_name != "3" && case_name != "patch")
    throw InvalidConfig("unknown case '" + case_name + "'");
  adapt_config().validate();
}

AdaptConfig CliConfig::adapt_config() const {
  AdaptConfig a;
  a.theta = theta;
  a.tol = tol;
  a.max_iters = max_iters;
  a.max_dofs = max_dofs;
  a.kind = estimator;
  a.order = order;
  a.grid_n = grid_n;
  return a;
}

RunLog run(const CliConfig& config, std::ostream& log) {
  config.validate();
  const std::filesystem::path dir(config.out_dir);
  std::filesystem::create_directories(dir);
  const auto tc = make_case(config.case_name, config.order);

  auto observer = [&](const IterationState& s) {
    const auto& mesh = s.disc.mesh();
    const int it = s.record.iter;
    {
      auto f = open_out(dir / ("indicators_" + std::to_string(it) + ".csv"));
      write_indicator_csv(f, s.indicators);
    }
    const std::size_t nc = mesh.num_cells();
    std::vector<double> mean(nc), eta(nc), score(nc), code(nc), dx(nc), dy(nc);
    for (std::size_t c = 0; c < nc; ++c) {
      const auto& el = s.disc.element(static_cast<int>(c));
      mean[c] = el.H.row(0).dot(s.proj.values[c]) / el.polygon.area();
      eta[c] = s.indicators.eta_sq[c];
      score[c] = s.indicators.score[c];
      code[c] = s.cut_codes[c];
      dx[c] = s.cut_directions[c].x();
      dy[c] = s.cut_directions[c].y();
    }
    auto f = open_out(dir / ("mesh_" + std::to_string(it) + ".vtk"));
    write_vtk(f,
              mesh,
              {{"projection_mean", mean},
               {"eta_sq", eta},
               {"score", score},
               {"cut_source", code},
               {"cut_dx", dx},
               {"cut_dy", dy}},
              "avem case " + tc.name + " iteration " + std::to_string(it));
    log << "iter " << it << "  ndof " << s.record.ndof << "  err " << s.record.err
        << "  estimator " << s.record.estimator << "  marked " << s.marked.size() << '\n';
  };

  const auto result = adaptive_loop(config.adapt_config(), tc, observer);
  {
    auto f = open_out(dir / "run.csv");
    write_run_csv(f, result.rows);
  }
  auto f = open_out(dir / "summary.txt");
  const auto& last = result.rows.back();
  f << std::setprecision(17);
  f << "case: " << config.case_name << '\n'
    << "order: " << config.order << '\n'
    << "estimator: " << to_string(config.estimator) << '\n'
    << "theta: " << config.theta << '\n'
    << "tol: " << config.tol << '\n'
    << "grid_n: " << config.grid_n << '\n'
    << "seed: " << config.seed << '\n'
    << "iterations: " << result.rows.size() << '\n'
    << "stop_reason: " << result.stop_reason << '\n'
    << "final_ndof: " << last.ndof << '\n'
    << "final_cells: " << last.n_cells << '\n'
    << "final_err: " << last.err << '\n'
    << "final_estimator: " << last.estimator << '\n';
  try {
    f << "rate: " << fit_rate(result.rows) << '\n';
  } catch (const InsufficientData&) {
    f << "rate: n/a\n";
  }
  log << "stopped (" << result.stop_reason << ") after " << result.rows.size()
      << " iterations; output in " << dir.string() << '\n';
  return result;
}

}  // namespace avem
