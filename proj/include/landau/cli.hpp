#pragma once
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "landau/grid.hpp"
#include "landau/potential.hpp"

namespace landau {

// Malformed command line or config document (exit code 2).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TorusSection {
  double L = 1.0;
  int d = 4;
  double hbar = 1.0;
  int q = 1;
  int N = 6;
};

struct EdSection {
  std::vector<std::pair<int, int>> sweep{{2, 3}, {4, 6}, {6, 9}};
  int n_max = 3;
  int fallback_n_max = 2;
  std::size_t budget = 100000;
  int krylov = 200;
  int max_restarts = 30;
  double tol = 1e-10;
  bool bias = true;
  bool save_ground_state = true;
};

struct RunConfig {
  TorusSection torus;
  int grid = 64;
  int n_max = 3;
  double truncation_tol = 1e-14;
  PotentialSpec potential = PotentialSpec::cosine(0.05);
  PotentialSpec interaction = PotentialSpec::gaussian_periodic(0.08, 0.15);
  double lambda = 0.0;  // localizer scale; 0 selects d^{1/4}
  double qll_tol = 1e-10;
  int qll_max_iterations = 20000;
  EdSection ed;
  std::vector<int> projector_levels{0};
  std::vector<int> projector_sweep{8, 16, 32, 64};
  std::vector<int> husimi_sweep{4, 8, 16};
  std::vector<int> verify_criteria{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  bool svg = true;
};

nlohmann::json to_json(const RunConfig& c);
// Strict: unknown keys and type mismatches raise ParseError. Missing keys keep defaults.
RunConfig config_from_json(const nlohmann::json& j);
// "a.b.c=value": value is read as JSON when it parses, otherwise as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);
// File text (may be empty for defaults) plus overrides, in order.
RunConfig load_config(const std::string& text, const std::vector<std::string>& overrides);

// 17 significant digits, '.' decimal, no locale; "nan"/"inf" for non-finite values.
std::string format_number(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string str() const;
};

// Heatmap of a grid field: one cell per sample, x to the right and y upwards.
// viewBox is "0 0 cols rows".
std::string svg_heatmap(const RealField& f, const std::string& title);

// Full driver. Returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace landau
