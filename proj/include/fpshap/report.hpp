#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpshap/errors.hpp"
#include "fpshap/study.hpp"

// Machine-readable study output. One long-format table (instance, feature,
// arm, method, estimates) plus a per-feature summary of bootstrap-vs-resampled
// SD ratios. Field order and number formatting are fixed, so identical
// configurations produce byte-identical files.

namespace fpshap {

enum class ReportFormat { kCsv, kJson };

inline ReportFormat parse_report_format(const std::string& name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  throw ArgumentError("unknown report format '" + name + "' (csv|json)");
}

struct ReportRow {
  Eigen::Index instance = 0;
  std::string feature;
  std::string arm;     // "srswor" or "with-replacement"
  std::string method;  // bootstrap method or "none"
  double exact_phi = 0.0;
  double mean_estimate = 0.0;
  double resampled_sd = 0.0;
  double resampled_sd_se = 0.0;
  std::optional<double> mean_boot_sd;
  std::optional<double> mean_failed_replicates;
};

struct SummaryRow {
  std::string feature;
  std::string method;
  double mean_resampled_sd = 0.0;
  double mean_boot_sd = 0.0;
  std::optional<double> ratio;  // empty when the resampled SD is zero
};

inline std::vector<ReportRow> report_rows(const StudyReport& report) {
  std::vector<ReportRow> rows;
  const auto instances = static_cast<Eigen::Index>(report.instances.size());
  const auto features = static_cast<Eigen::Index>(report.feature_names.size());
  for (Eigen::Index i = 0; i < instances; ++i) {
    for (Eigen::Index j = 0; j < features; ++j) {
      const auto make_base = [&](const std::string& arm,
                                 const ArmSummary& summary) {
        ReportRow row;
        row.instance = report.instances[static_cast<std::size_t>(i)];
        row.feature = report.feature_names[static_cast<std::size_t>(j)];
        row.arm = arm;
        row.exact_phi = report.exact_phi(i, j);
        row.mean_estimate = summary.mean_estimate(i, j);
        row.resampled_sd = summary.resampled_sd(i, j);
        row.resampled_sd_se = summary.resampled_sd_se(i, j);
        return row;
      };
      if (report.methods.empty()) {
        ReportRow row = make_base("srswor", report.srswor);
        row.method = "none";
        rows.push_back(std::move(row));
      }
      for (const MethodSummary& method : report.methods) {
        ReportRow row = make_base("srswor", report.srswor);
        row.method = to_string(method.method);
        row.mean_boot_sd = method.mean_boot_sd(i, j);
        row.mean_failed_replicates = method.mean_failed_replicates;
        rows.push_back(std::move(row));
      }
      if (report.baseline) {
        ReportRow row = make_base("with-replacement", *report.baseline);
        row.method = "none";
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

inline std::vector<SummaryRow> summary_rows(const StudyReport& report) {
  std::vector<SummaryRow> rows;
  const auto features = static_cast<Eigen::Index>(report.feature_names.size());
  for (Eigen::Index j = 0; j < features; ++j) {
    const double mean_resampled = report.srswor.resampled_sd.col(j).mean();
    for (const MethodSummary& method : report.methods) {
      SummaryRow row;
      row.feature = report.feature_names[static_cast<std::size_t>(j)];
      row.method = to_string(method.method);
      row.mean_resampled_sd = mean_resampled;
      row.mean_boot_sd = method.mean_boot_sd.col(j).mean();
      if (mean_resampled > 0.0) {
        row.ratio = row.mean_boot_sd / mean_resampled;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace detail {

inline std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

inline void write_text(const std::filesystem::path& path,
                       const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace detail

inline std::vector<std::filesystem::path> emit_report(
    const StudyReport& report, ReportFormat format,
    const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::vector<ReportRow> rows = report_rows(report);
  const std::vector<SummaryRow> summary = summary_rows(report);
  std::vector<std::filesystem::path> written;

  if (format == ReportFormat::kCsv) {
    std::string table =
        "instance,feature,arm,method,exact_phi,mean_estimate,resampled_sd,"
        "resampled_sd_se,mean_boot_sd,mean_failed_replicates\n";
    for (const ReportRow& row : rows) {
      table += std::to_string(row.instance) + ',' + row.feature + ',' +
               row.arm + ',' + row.method + ',' +
               detail::format_double(row.exact_phi) + ',' +
               detail::format_double(row.mean_estimate) + ',' +
               detail::format_double(row.resampled_sd) + ',' +
               detail::format_double(row.resampled_sd_se) + ',' +
               (row.mean_boot_sd ? detail::format_double(*row.mean_boot_sd)
                                 : std::string{}) +
               ',' +
               (row.mean_failed_replicates
                    ? detail::format_double(*row.mean_failed_replicates)
                    : std::string{}) +
               '\n';
    }
    const auto table_path = out_dir / "report.csv";
    detail::write_text(table_path, table);
    written.push_back(table_path);

    std::string sum =
        "feature,method,mean_resampled_sd,mean_boot_sd,ratio\n";
    for (const SummaryRow& row : summary) {
      sum += row.feature + ',' + row.method + ',' +
             detail::format_double(row.mean_resampled_sd) + ',' +
             detail::format_double(row.mean_boot_sd) + ',' +
             (row.ratio ? detail::format_double(*row.ratio) : std::string{}) +
             '\n';
    }
    const auto summary_path = out_dir / "summary.csv";
    detail::write_text(summary_path, sum);
    written.push_back(summary_path);

    if (!report.run_estimates.empty()) {
      std::string runs = "run,instance,feature,estimate\n";
      for (std::size_t r = 0; r < report.run_estimates.size(); ++r) {
        const Eigen::MatrixXd& est = report.run_estimates[r];
        for (Eigen::Index i = 0; i < est.rows(); ++i) {
          for (Eigen::Index j = 0; j < est.cols(); ++j) {
            runs += std::to_string(r) + ',' +
                    std::to_string(
                        report.instances[static_cast<std::size_t>(i)]) +
                    ',' + report.feature_names[static_cast<std::size_t>(j)] +
                    ',' + detail::format_double(est(i, j)) + '\n';
          }
        }
      }
      const auto runs_path = out_dir / "runs.csv";
      detail::write_text(runs_path, runs);
      written.push_back(runs_path);
    }
    return written;
  }

  nlohmann::ordered_json doc;
  doc["runs"] = report.runs;
  doc["replicates"] = report.replicates;
  doc["coalitions"] = report.n_total;
  doc["seed"] = report.seed;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const ReportRow& row : rows) {
    nlohmann::ordered_json r;
    r["instance"] = row.instance;
    r["feature"] = row.feature;
    r["arm"] = row.arm;
    r["method"] = row.method;
    r["exact_phi"] = row.exact_phi;
    r["mean_estimate"] = row.mean_estimate;
    r["resampled_sd"] = row.resampled_sd;
    r["resampled_sd_se"] = row.resampled_sd_se;
    r["mean_boot_sd"] =
        row.mean_boot_sd ? nlohmann::ordered_json(*row.mean_boot_sd)
                         : nlohmann::ordered_json(nullptr);
    r["mean_failed_replicates"] =
        row.mean_failed_replicates
            ? nlohmann::ordered_json(*row.mean_failed_replicates)
            : nlohmann::ordered_json(nullptr);
    doc["rows"].push_back(std::move(r));
  }
  doc["summary"] = nlohmann::ordered_json::array();
  for (const SummaryRow& row : summary) {
    nlohmann::ordered_json r;
    r["feature"] = row.feature;
    r["method"] = row.method;
    r["mean_resampled_sd"] = row.mean_resampled_sd;
    r["mean_boot_sd"] = row.mean_boot_sd;
    r["ratio"] = row.ratio ? nlohmann::ordered_json(*row.ratio)
                           : nlohmann::ordered_json(nullptr);
    doc["summary"].push_back(std::move(r));
  }
  if (!report.run_estimates.empty()) {
    doc["run_estimates"] = nlohmann::ordered_json::array();
    for (const Eigen::MatrixXd& est : report.run_estimates) {
      nlohmann::ordered_json run = nlohmann::ordered_json::array();
      for (Eigen::Index i = 0; i < est.rows(); ++i) {
        nlohmann::ordered_json inst = nlohmann::ordered_json::array();
        for (Eigen::Index j = 0; j < est.cols(); ++j) {
          inst.push_back(est(i, j));
        }
        run.push_back(std::move(inst));
      }
      doc["run_estimates"].push_back(std::move(run));
    }
  }
  const auto json_path = out_dir / "report.json";
  detail::write_text(json_path, doc.dump(2) + "\n");
  written.push_back(json_path);
  return written;
}

}  // namespace fpshap
