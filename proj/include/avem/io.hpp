#pragma once

// File formats, convergence-rate fitting and the driver behind the CLI.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "avem/adapt.hpp"
#include "avem/mesh.hpp"

namespace avem {

/// Plain-text mesh: "VERTICES n", n lines "x y", "CELLS m", m lines
/// "k v0 ... v{k-1}". Coordinates are written with 17 significant digits.
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

using CellField = std::pair<std::string, std::vector<double>>;

/// Legacy ASCII VTK unstructured grid of polygons (cell type 7) with scalar
/// cell data.
void write_vtk(std::ostream& os, const Mesh& mesh, const std::vector<CellField>& cell_data,
               const std::string& title = "avem mesh");

struct VtkGrid {
  std::vector<Point2d> points;
  std::vector<std::vector<int>> cells;
  std::vector<CellField> cell_data;
};

/// Reads what write_vtk produces. Throws InvalidMesh on malformed input.
VtkGrid read_vtk(std::istream& is);

/// run.csv: iter,ndof,estimator,err,eta_sum,xi_sum,sigma_sum,n_cells,cut_G_count,cut_K_count
void write_run_csv(std::ostream& os, const std::vector<IterationRecord>& rows);
std::vector<IterationRecord> read_run_csv(std::istream& is);

/// Least-squares slope of log err against log ndof over the rows after the
/// first `burn_in`. Throws InsufficientData with fewer than two such rows.
double fit_rate(const std::vector<double>& ndof, const std::vector<double>& err,
                int burn_in = 3);
double fit_rate(const std::vector<IterationRecord>& rows, int burn_in = 3);

struct CliConfig {
  std::string case_name{"1"};
  int order{1};
  EstimatorKind estimator{EstimatorKind::Heuristic};
  double theta{0.5};
  double tol{1e-2};
  int max_iters{60};
  int max_dofs{1000000};
  int grid_n{4};
  std::string out_dir{"avem_out"};
  unsigned seed{0};

  /// Throws InvalidConfig on out-of-range values or an unknown case.
  void validate() const;
  AdaptConfig adapt_config() const;
};

/// Runs the adaptive loop and writes run.csv, indicators_<iter>.csv,
/// mesh_<iter>.vtk and summary.txt into `out_dir`. Progress goes to `log`.
RunLog run(const CliConfig& config, std::ostream& log);

}  // namespace avem
