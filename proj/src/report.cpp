#include "qmcl/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <functional>

namespace qmcl {

namespace {

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class TableWriter {
 public:
  TableWriter(const fs::path& dir, char delimiter) : dir_(dir), delimiter_(delimiter) {}

  void write(const std::string& name, const std::vector<std::string>& header,
             const std::function<void(std::ostream&)>& body) {
    const fs::path path = dir_ / (name + ".csv");
    {
      std::ofstream out(path, std::ios::binary);
      if (!out) throw std::runtime_error("export_report: cannot open " + path.string());
      for (std::size_t k = 0; k < header.size(); ++k) {
        if (k) out << delimiter_;
        out << header[k];
      }
      out << '\n';
      body(out);
    }
    files_.push_back({{"file", path.filename().string()}, {"sha256", sha256_file(path)}});
  }

  char delimiter() const { return delimiter_; }
  const nlohmann::json& files() const { return files_; }

 private:
  fs::path dir_;
  char delimiter_;
  nlohmann::json files_ = nlohmann::json::array();
};

void write_grid(TableWriter& tables, const std::string& name, const std::vector<Vec>& rows,
                const Vec& centers) {
  std::vector<std::string> header{"step"};
  for (Eigen::Index m = 0; m < centers.size(); ++m) header.push_back(format_number(centers[m]));
  tables.write(name, header, [&](std::ostream& out) {
    for (std::size_t s = 0; s < rows.size(); ++s) {
      out << s;
      for (Eigen::Index m = 0; m < rows[s].size(); ++m) {
        out << tables.delimiter() << format_number(rows[s][m]);
      }
      out << '\n';
    }
  });
}

void write_series(TableWriter& tables, const std::string& tag, const FieldSeries& series,
                  const Vec& centers) {
  std::vector<Vec> h, q, gh, gq;
  for (const auto& s : series.states) {
    h.push_back(s.h);
    q.push_back(s.q);
  }
  for (const auto& g : series.fluxes) {
    gh.push_back(g.g_h);
    gq.push_back(g.g_q);
  }
  write_grid(tables, tag + "_h", h, centers);
  write_grid(tables, tag + "_q", q, centers);
  write_grid(tables, tag + "_flux_h", gh, centers);
  write_grid(tables, tag + "_flux_q", gq, centers);
}

}  // namespace

void export_report(const PredictionReport& report, const fs::path& dir, char delimiter) {
  fs::create_directories(dir);
  TableWriter tables(dir, delimiter);
  const Vec& x = report.cell_centers;
  write_series(tables, "qmcl", report.qmcl, x);
  write_series(tables, "zero", report.zero_closure, x);
  if (report.truth) write_series(tables, "truth", *report.truth, x);

  const auto last = static_cast<std::size_t>(report.horizon());
  std::vector<std::string> header{"x", "qmcl_h", "qmcl_q", "qmcl_flux_h", "qmcl_flux_q",
                                  "zero_h", "zero_q"};
  if (report.truth) {
    for (const char* c : {"truth_h", "truth_q", "truth_flux_h", "truth_flux_q"}) header.push_back(c);
  }
  tables.write("final_profiles", header, [&](std::ostream& out) {
    for (Eigen::Index m = 0; m < x.size(); ++m) {
      std::vector<double> row{x[m],
                              report.qmcl.states[last].h[m],
                              report.qmcl.states[last].q[m],
                              report.qmcl.fluxes[last].g_h[m],
                              report.qmcl.fluxes[last].g_q[m],
                              report.zero_closure.states[last].h[m],
                              report.zero_closure.states[last].q[m]};
      if (report.truth) {
        row.push_back(report.truth->states[last].h[m]);
        row.push_back(report.truth->states[last].q[m]);
        row.push_back(report.truth->fluxes[last].g_h[m]);
        row.push_back(report.truth->fluxes[last].g_q[m]);
      }
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (k) out << delimiter;
        out << format_number(row[k]);
      }
      out << '\n';
    }
  });

  nlohmann::json summary = {{"delta", report.delta},
                            {"horizon", report.horizon()},
                            {"conditioning_period", report.conditioning_period},
                            {"skipped_conditionings", report.skipped_conditionings},
                            {"density_resets", report.density_resets}};
  if (report.truth) {
    tables.write("rmse_series", {"step", "qmcl_h", "qmcl_q", "zero_h", "zero_q"},
                 [&](std::ostream& out) {
                   for (std::size_t s = 0; s < report.rmse_qmcl_h.size(); ++s) {
                     out << s << delimiter << format_number(report.rmse_qmcl_h[s]) << delimiter
                         << format_number(report.rmse_qmcl_q[s]) << delimiter
                         << format_number(report.rmse_zero_h[s]) << delimiter
                         << format_number(report.rmse_zero_q[s]) << '\n';
                   }
                 });
    const NormalizedErrors ne = normalized_errors(report);
    const double agg[4] = {aggregate_rmse(report.rmse_qmcl_h), aggregate_rmse(report.rmse_qmcl_q),
                           aggregate_rmse(report.rmse_zero_h), aggregate_rmse(report.rmse_zero_q)};
    const double norm[4] = {ne.qmcl_h, ne.qmcl_q, ne.zero_h, ne.zero_q};
    tables.write("rmse_summary", {"model", "field", "rmse", "normalized_rmse"},
                 [&](std::ostream& out) {
                   const char* models[4] = {"qmcl", "qmcl", "zero", "zero"};
                   const char* fields[4] = {"h", "q", "h", "q"};
                   for (int k = 0; k < 4; ++k) {
                     out << models[k] << delimiter << fields[k] << delimiter
                         << format_number(agg[k]) << delimiter << format_number(norm[k]) << '\n';
                   }
                 });
    summary["rmse"] = {{"qmcl_h", agg[0]}, {"qmcl_q", agg[1]}, {"zero_h", agg[2]},
                       {"zero_q", agg[3]}};
  }
  summary["files"] = tables.files();
  summary["delimiter"] = std::string(1, delimiter);
  write_json(dir / "manifest.json", summary);
}

}  // namespace qmcl
