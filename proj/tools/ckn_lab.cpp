// ckn-lab: batch driver. Prints a JSON report (schema ckn-lab/1).
// Exit codes: 0 all checks pass, 1 violations, 2 configuration error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "ckn/report.hpp"

namespace {

int emit(const ckn::Json& report, const std::string& out) {
  const std::string text = report.dump(2);
  if (out.empty()) {
    std::cout << text << '\n';
    return 0;
  }
  std::ofstream f(out);
  if (!f) {
    std::cerr << "ckn-lab: cannot write " << out << '\n';
    return 2;
  }
  f << text << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ckn-lab: numerical laboratory for a weighted critical radial problem"};
  std::string command, config_path, out, csv_dir;
  std::optional<std::size_t> grid_n;
  std::optional<double> grid_S;
  double tol_scale = 1.0;

  std::string names;
  for (const auto& n : ckn::command_names()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("command", command, names)->required();
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out, "write the report here instead of stdout");
  app.add_option("--csv-dir", csv_dir, "directory for CSV tables");
  app.add_option("--grid-n", grid_n, "grid nodes (default 2048)");
  app.add_option("--grid-S", grid_S, "grid half-width in s = ln r (default 20/kappa)");
  app.add_option("--tol-scale", tol_scale, "multiplies every tolerance")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    ckn::RunConfig cfg = config_path.empty() ? ckn::RunConfig{} : ckn::RunConfig::from_file(config_path);
    if (grid_n) cfg.grid.n = *grid_n;
    if (grid_S) cfg.grid.S = *grid_S;
    const auto result = ckn::run_command(command, cfg, {csv_dir, tol_scale});
    if (emit(result.report, out) != 0) return 2;
    return result.exit_code;
  } catch (const ckn::ConfigError& e) {
    ckn::Json err{{"schema", ckn::kReportSchema}, {"command", command}, {"error", e.what()}, {"passed", false}};
    emit(err, out);
    std::cerr << "ckn-lab: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    ckn::Json err{{"schema", ckn::kReportSchema}, {"command", command}, {"error", e.what()}, {"passed", false}};
    emit(err, out);
    std::cerr << "ckn-lab: " << e.what() << '\n';
    return 1;
  }
}
