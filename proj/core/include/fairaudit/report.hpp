#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fairaudit/posthoc.hpp"
#include "fairaudit/records.hpp"

namespace fairaudit {

struct AuditSettings {
  std::uint64_t seed = 42;
  int iterations = 1000;
  std::int64_t min_n = 50;
  int bins = 15;
  double threshold = 0.5;  // deployment threshold for error metrics
  std::vector<double> coverage_grid = default_coverage_grid();
  double temp_lo = 0.5, temp_hi = 5.0, temp_step = 0.01;
  ThresholdGrid threshold_grid{};
  std::int64_t bnsp_min_positives = 50;
  std::int64_t rc_min_retained = 20;
  int top_k_errors = 5;
  int n_workers = 1;
  // Digest per method of the originating input file, when known; carried
  // into the report metadata verbatim.
  std::vector<std::pair<std::string, std::string>> input_digests;
};

// Canonical audit output. The JSON form is the artifact of record: key order
// and number formatting are deterministic, so identical inputs and settings
// produce byte-identical bytes. Markdown and CSV are renderings of it.
class AuditReport {
public:
  AuditReport();
  AuditReport(const AuditReport&);
  AuditReport(AuditReport&&) noexcept;
  AuditReport& operator=(const AuditReport&);
  AuditReport& operator=(AuditReport&&) noexcept;
  ~AuditReport();

  std::string to_json() const;
  static AuditReport from_json(const std::string& text);

  struct Impl;
  const Impl& impl() const { return *impl_; }
  Impl& impl() { return *impl_; }

private:
  std::unique_ptr<Impl> impl_;
};

// Full audit over a paired set: per-method ranking and calibration tables
// with bootstrap CIs, differences against the first (baseline) method,
// temperature and threshold interventions, risk-coverage curves, tail
// statistics and the qualitative confident-error table. Errors when no
// identity meets min_n or fewer than one method is present.
AuditReport run_audit(const PairedPredictions& paired, const AuditSettings& settings);

std::string render_markdown(const AuditReport& report);

// (relative filename, content) pairs for the per-table CSV export.
std::vector<std::pair<std::string, std::string>> render_csv_tables(const AuditReport& report);

// Writes report.json, report.md and tables/*.csv under out_dir.
void write_report_files(const AuditReport& report, const std::filesystem::path& out_dir);

}  // namespace fairaudit
