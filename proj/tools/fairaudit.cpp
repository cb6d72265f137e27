// fairaudit command line: audit, synth, train, rc-curve, report.
//
// Exit codes: 0 success, 1 input or usage errors, 2 unexpected failures.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairaudit/error.hpp"
#include "fairaudit/io.hpp"
#include "fairaudit/numeric.hpp"
#include "fairaudit/posthoc.hpp"
#include "fairaudit/report.hpp"
#include "fairaudit/scenarios.hpp"
#include "fairaudit/trainers.hpp"

namespace {

using namespace fairaudit;

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw AuditError("bad coverage grid entry '" + item + "'");
    }
  }
  if (out.empty()) throw AuditError("empty coverage grid");
  return out;
}

FileFormat resolve_format(const std::string& format, const std::string& path) {
  if (format == "csv") return FileFormat::Csv;
  if (format == "jsonl") return FileFormat::Jsonl;
  if (path == "-")
    throw AuditError("stdin input needs an explicit --format");
  return detect_format(path);
}

struct AuditOptions {
  std::vector<std::string> pred_files;
  std::vector<std::string> names;
  std::string format = "auto";
  std::string out_dir = "audit-out";
  std::uint64_t seed = 42;
  int iterations = 1000;
  std::int64_t min_n = 50;
  int bins = 15;
  double threshold = 0.5;
  std::string coverage_grid = "1.0,0.9,0.8,0.7,0.6,0.5";
  int workers = 1;
};

int run_audit_cmd(const AuditOptions& opt) {
  if (!opt.names.empty() && opt.names.size() != opt.pred_files.size())
    throw AuditError("--name must be given once per --pred");

  PairedPredictions paired;
  AuditSettings settings;
  settings.seed = opt.seed;
  settings.iterations = opt.iterations;
  settings.min_n = opt.min_n;
  settings.bins = opt.bins;
  settings.threshold = opt.threshold;
  settings.coverage_grid = parse_grid(opt.coverage_grid);
  settings.n_workers = opt.workers;

  bool used_stdin = false;
  for (std::size_t i = 0; i < opt.pred_files.size(); ++i) {
    const auto& path = opt.pred_files[i];
    std::string name = i < opt.names.size() ? opt.names[i] : "";
    FileFormat format = resolve_format(opt.format, path);
    if (path == "-") {
      if (used_stdin) throw AuditError("stdin can only be read once");
      used_stdin = true;
      std::ostringstream buf;
      buf << std::cin.rdbuf();
      std::string bytes = buf.str();
      if (name.empty()) name = "stdin";
      std::istringstream in(bytes);
      auto set = load_predictions(in, format, name);
      settings.input_digests.emplace_back(set.name(), bytes_digest_hex(bytes));
      paired.add(std::move(set));
    } else {
      auto set = load_predictions(path, format, name);
      settings.input_digests.emplace_back(set.name(), file_digest_hex(path));
      paired.add(std::move(set));
    }
  }

  auto report = run_audit(paired, settings);
  write_report_files(report, opt.out_dir);
  std::cout << "audit: " << paired.n_methods() << " method(s), " << paired.n_records()
            << " records; report written to " << opt.out_dir << "\n";
  return 0;
}

struct SynthOptions {
  std::string profile = "all";
  std::uint64_t seed = 42;
  std::string format = "csv";
  std::string out_dir = "synth-out";
};

int run_synth_cmd(const SynthOptions& opt) {
  std::vector<Profile> profiles;
  if (opt.profile == "all")
    profiles = all_profiles();
  else
    profiles = {parse_profile(opt.profile)};
  FileFormat format = opt.format == "csv" ? FileFormat::Csv : FileFormat::Jsonl;
  const char* ext = format == FileFormat::Csv ? ".csv" : ".jsonl";

  std::error_code ec;
  std::filesystem::create_directories(opt.out_dir, ec);
  if (ec) throw AuditError("cannot create '" + opt.out_dir + "'");
  for (auto profile : profiles) {
    auto set = paper_profile(profile, opt.seed);
    auto path = std::filesystem::path(opt.out_dir) / (profile_name(profile) + ext);
    save_predictions(set, path, format);
    std::cout << "synth: wrote " << path.string() << " (" << set.size() << " records)\n";
  }
  return 0;
}

struct TrainOptions {
  std::string method = "all";
  std::uint64_t seed = 42;
  std::int64_t n = 6000;
  std::int64_t n_test = 6000;
  int d = 6;
  int epochs = 2;
  int batch_size = 16;
  double lr0 = 0.5;
  std::string out_dir = "train-out";
};

int run_train_cmd(const TrainOptions& opt) {
  std::vector<TrainMethod> methods;
  if (opt.method == "all")
    methods = {TrainMethod::Erm, TrainMethod::Reweighted, TrainMethod::Dro};
  else
    methods = {parse_train_method(opt.method)};

  auto spec = TrainDataSpec::spurious_minority();
  auto train_data = generate_training_data(opt.seed, opt.n, opt.d, spec);
  // Held-out rows come from an independent stream of the same population.
  auto test_data = generate_training_data(opt.seed + 1, opt.n_test, opt.d, spec);

  std::error_code ec;
  std::filesystem::create_directories(opt.out_dir, ec);
  if (ec) throw AuditError("cannot create '" + opt.out_dir + "'");

  std::ostringstream metrics;
  metrics << "method,group,error\n";
  for (auto method : methods) {
    TrainConfig config;
    config.method = method;
    config.seed = opt.seed;
    config.epochs = opt.epochs;
    config.batch_size = opt.batch_size;
    config.lr0 = opt.lr0;
    auto result = train(train_data, config);
    auto name = train_method_name(method);

    auto set = to_prediction_set(result.model, test_data, name);
    auto path = std::filesystem::path(opt.out_dir) / ("pred_" + name + ".csv");
    save_predictions(set, path, FileFormat::Csv);

    auto report = group_errors(result.model, test_data);
    for (const auto& [identity, err] : report.by_identity)
      metrics << name << ',' << identity << ',' << format_double(err) << "\n";
    metrics << name << ",worst," << format_double(report.worst) << "\n";
    metrics << name << ",average," << format_double(report.average) << "\n";
    std::cout << "train: " << name << " worst-group error " << format_fixed(report.worst, 4)
              << ", average error " << format_fixed(report.average, 4) << ", wrote "
              << path.string() << "\n";
  }
  auto metrics_path = std::filesystem::path(opt.out_dir) / "metrics.csv";
  std::ofstream mout(metrics_path, std::ios::binary);
  if (!mout) throw AuditError("cannot write '" + metrics_path.string() + "'");
  mout << metrics.str();
  std::cout << "train: wrote " << metrics_path.string() << "\n";
  return 0;
}

struct RcCurveOptions {
  std::string pred_file;
  std::string name;
  std::string format = "auto";
  std::string out_file = "-";
  std::string coverage_grid = "1.0,0.9,0.8,0.7,0.6,0.5";
  double threshold = 0.5;
  std::int64_t min_n = 50;
  std::int64_t min_retained = 20;
};

int run_rc_curve_cmd(const RcCurveOptions& opt) {
  FileFormat format = resolve_format(opt.format, opt.pred_file);
  PredictionSet set = opt.pred_file == "-"
                          ? load_predictions(std::cin, format,
                                             opt.name.empty() ? "stdin" : opt.name)
                          : load_predictions(opt.pred_file, format, opt.name);
  auto identities = qualifying_identities(census(set), opt.min_n);
  auto curve = risk_coverage_curve(set, parse_grid(opt.coverage_grid), opt.threshold,
                                   identities, opt.min_retained);
  auto csv = risk_coverage_csv(curve, identities);
  if (opt.out_file == "-") {
    std::cout << csv;
  } else {
    std::ofstream out(opt.out_file, std::ios::binary);
    if (!out) throw AuditError("cannot write '" + opt.out_file + "'");
    out << csv;
  }
  return 0;
}

struct ReportOptions {
  std::string in_file;
  std::string render = "md";
  std::string out_path;
};

int run_report_cmd(const ReportOptions& opt) {
  std::ifstream in(opt.in_file, std::ios::binary);
  if (!in) throw AuditError("cannot open '" + opt.in_file + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  auto report = AuditReport::from_json(buf.str());

  if (opt.render == "md") {
    auto md = render_markdown(report);
    if (opt.out_path.empty() || opt.out_path == "-") {
      std::cout << md;
    } else {
      std::ofstream out(opt.out_path, std::ios::binary);
      if (!out) throw AuditError("cannot write '" + opt.out_path + "'");
      out << md;
    }
    return 0;
  }
  // csv: one file per table under the output directory.
  std::string dir = opt.out_path.empty() ? "report-tables" : opt.out_path;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw AuditError("cannot create '" + dir + "'");
  for (const auto& [name, content] : render_csv_tables(report)) {
    auto path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw AuditError("cannot write '" + path.string() + "'");
    out << content;
    std::cout << "report: wrote " << path.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairness audit toolkit for probabilistic binary classifiers"};
  app.set_version_flag("--version", "fairaudit 0.1.0");
  app.require_subcommand(1);

  AuditOptions audit_opt;
  auto* audit_cmd = app.add_subcommand("audit", "Audit one or more paired prediction files");
  audit_cmd->add_option("--pred", audit_opt.pred_files,
                        "Prediction file (repeatable; '-' reads stdin once)")
      ->required();
  audit_cmd->add_option("--name", audit_opt.names,
                        "Method name per --pred (default: file stem)");
  audit_cmd->add_option("--format", audit_opt.format, "Input format: csv, jsonl or auto")
      ->check(CLI::IsMember({"csv", "jsonl", "auto"}))
      ->capture_default_str();
  audit_cmd->add_option("--out", audit_opt.out_dir, "Output directory")->capture_default_str();
  audit_cmd->add_option("--seed", audit_opt.seed, "Bootstrap master seed")
      ->envname("FAIRAUDIT_SEED")
      ->capture_default_str();
  audit_cmd->add_option("--iterations", audit_opt.iterations, "Bootstrap iterations")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  audit_cmd->add_option("--min-n", audit_opt.min_n, "Smallest identity group analyzed")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  audit_cmd->add_option("--bins", audit_opt.bins, "Calibration bins")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  audit_cmd->add_option("--threshold", audit_opt.threshold, "Decision threshold")
      ->capture_default_str();
  audit_cmd->add_option("--coverage-grid", audit_opt.coverage_grid,
                        "Descending comma-separated coverages starting at 1.0")
      ->capture_default_str();
  audit_cmd->add_option("--workers", audit_opt.workers, "Bootstrap worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  SynthOptions synth_opt;
  auto* synth_cmd = app.add_subcommand("synth", "Write synthetic benchmark prediction sets");
  synth_cmd->add_option("--profile", synth_opt.profile, "erm, reweighted, dro or all")
      ->check(CLI::IsMember({"erm", "reweighted", "dro", "all"}))
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth_opt.seed, "Generator seed")
      ->envname("FAIRAUDIT_SEED")
      ->capture_default_str();
  synth_cmd->add_option("--format", synth_opt.format, "Output format: csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}))
      ->capture_default_str();
  synth_cmd->add_option("--out", synth_opt.out_dir, "Output directory")->capture_default_str();

  TrainOptions train_opt;
  auto* train_cmd =
      app.add_subcommand("train", "Train desk-scale classifiers on planted-shortcut data");
  train_cmd->add_option("--method", train_opt.method, "erm, reweighted, dro or all")
      ->check(CLI::IsMember({"erm", "reweighted", "dro", "all"}))
      ->capture_default_str();
  train_cmd->add_option("--seed", train_opt.seed, "Data and shuffle seed")
      ->envname("FAIRAUDIT_SEED")
      ->capture_default_str();
  train_cmd->add_option("--n", train_opt.n, "Training rows")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--n-test", train_opt.n_test, "Held-out rows")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--d", train_opt.d, "Feature width")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--epochs", train_opt.epochs, "Training epochs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--batch", train_opt.batch_size, "Minibatch size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--lr", train_opt.lr0, "Initial learning rate")
      ->capture_default_str();
  train_cmd->add_option("--out", train_opt.out_dir, "Output directory")->capture_default_str();

  RcCurveOptions rc_opt;
  auto* rc_cmd = app.add_subcommand("rc-curve", "Risk-coverage curve for one prediction file");
  rc_cmd->add_option("--pred", rc_opt.pred_file, "Prediction file ('-' reads stdin)")
      ->required();
  rc_cmd->add_option("--name", rc_opt.name, "Set name (default: file stem)");
  rc_cmd->add_option("--format", rc_opt.format, "Input format: csv, jsonl or auto")
      ->check(CLI::IsMember({"csv", "jsonl", "auto"}))
      ->capture_default_str();
  rc_cmd->add_option("--out", rc_opt.out_file, "Output file ('-' for stdout)")
      ->capture_default_str();
  rc_cmd->add_option("--coverage-grid", rc_opt.coverage_grid, "Descending coverages from 1.0")
      ->capture_default_str();
  rc_cmd->add_option("--threshold", rc_opt.threshold, "Decision threshold")
      ->capture_default_str();
  rc_cmd->add_option("--min-n", rc_opt.min_n, "Smallest identity group reported")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rc_cmd->add_option("--min-retained", rc_opt.min_retained,
                     "Smallest retained slice with a reported gap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  ReportOptions report_opt;
  auto* report_cmd = app.add_subcommand("report", "Re-render a report.json");
  report_cmd->add_option("--in", report_opt.in_file, "Path to report.json")->required();
  report_cmd->add_option("--render", report_opt.render, "md or csv")
      ->check(CLI::IsMember({"md", "csv"}))
      ->capture_default_str();
  report_cmd->add_option("--out", report_opt.out_path,
                         "Output file (md) or directory (csv); stdout by default for md");

  try {
    app.parse(argc, argv);
    if (*audit_cmd) return run_audit_cmd(audit_opt);
    if (*synth_cmd) return run_synth_cmd(synth_opt);
    if (*train_cmd) return run_train_cmd(train_opt);
    if (*rc_cmd) return run_rc_curve_cmd(rc_opt);
    if (*report_cmd) return run_report_cmd(report_opt);
    return 1;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // --help and --version stay 0
  } catch (const AuditError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
