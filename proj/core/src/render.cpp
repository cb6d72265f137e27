#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fairaudit/error.hpp"
#include "fairaudit/io.hpp"
#include "fairaudit/numeric.hpp"
#include "fairaudit/report.hpp"
#include "report_impl.hpp"

namespace fairaudit {

using nlohmann::json;

namespace {

// Markdown shows three decimals; CSV keeps full round-trip precision.
std::string md_num(const json& v) {
  if (v.is_null()) return "n/a";
  return format_fixed(v.get<double>(), 3);
}

std::string md_est(const json& est) {
  return md_num(est["point"]) + " [" + md_num(est["lo"]) + ", " + md_num(est["hi"]) + "]";
}

std::string csv_num(const json& v) {
  if (v.is_null()) return "";
  return format_double(v.get<double>());
}

void csv_est_fields(std::ostringstream& out, const json& est) {
  out << csv_num(est["point"]) << ',' << csv_num(est["lo"]) << ',' << csv_num(est["hi"]) << ','
      << (est["significant"].get<bool>() ? 1 : 0) << ',' << (est["fragile"].get<bool>() ? 1 : 0)
      << ',' << est["used"].get<int>() << ',' << est["skipped"].get<int>();
}

std::string yes_no(bool v) { return v ? "yes" : "no"; }

const json& doc_of(const AuditReport& report) { return report.impl().doc; }

std::vector<std::string> method_list(const json& doc) {
  return doc["meta"]["methods"].get<std::vector<std::string>>();
}

std::vector<std::string> identity_list(const json& doc) {
  return doc["identities"].get<std::vector<std::string>>();
}

}  // namespace

std::string render_markdown(const AuditReport& report) {
  const json& doc = doc_of(report);
  auto methods = method_list(doc);
  auto identities = identity_list(doc);
  const json& meta = doc["meta"];
  std::ostringstream md;

  md << "# Fairness audit\n\n";
  md << "- records: " << meta["n_records"].get<std::int64_t>() << "\n";
  md << "- methods:";
  for (const auto& m : methods) md << ' ' << m;
  md << " (baseline: " << meta["baseline"].get<std::string>() << ")\n";
  md << "- seed " << meta["seed"].get<std::uint64_t>() << ", " << meta["iterations"].get<int>()
     << " bootstrap iterations, " << meta["bins"].get<int>() << " calibration bins, min group size "
     << meta["min_n"].get<std::int64_t>() << "\n";
  if (!doc["excluded_identities"].empty()) {
    md << "- excluded (below min group size):";
    for (const auto& e : doc["excluded_identities"]) md << ' ' << e.get<std::string>();
    md << "\n";
  }
  md << "\n";

  md << "## Group census\n\n";
  md << "| identity | total | positives | negatives |\n|---|---|---|---|\n";
  for (const auto& [identity, counts] : doc["census"].items()) {
    md << "| " << identity << " | " << counts["total"].get<std::int64_t>() << " | "
       << counts["positives"].get<std::int64_t>() << " | "
       << counts["negatives"].get<std::int64_t>() << " |\n";
  }
  md << "\n";

  md << "## Aggregate metrics\n\n";
  md << "| method | auc | ece | error rate |\n|---|---|---|---|\n";
  for (const auto& m : methods) {
    const json& agg = doc["methods"][m]["aggregate"];
    md << "| " << m << " | " << md_est(agg["auc"]) << " | " << md_est(agg["ece"]) << " | "
       << md_est(agg["error_rate"]) << " |\n";
  }
  md << "\n";

  md << "## Ranking by identity\n\n";
  md << "| method | identity | subgroup auc | bpsn auc | bnsp auc | error gap |\n"
     << "|---|---|---|---|---|---|\n";
  for (const auto& m : methods) {
    const json& ranking = doc["methods"][m]["ranking"];
    for (const auto& identity : identities) {
      const json& r = ranking[identity];
      md << "| " << m << " | " << identity << " | " << md_est(r["subgroup_auc"]) << " | "
         << md_est(r["bpsn_auc"]) << " | "
         << (r.contains("bnsp_auc") ? md_est(r["bnsp_auc"]) : "n/a") << " | "
         << md_est(r["error_gap"]) << " |\n";
    }
  }
  md << "\n";

  md << "## Calibration by identity\n\n";
  for (const auto& m : methods) {
    if (doc["methods"][m].contains("background_ece"))
      md << "Background ECE (" << m << "): " << md_est(doc["methods"][m]["background_ece"])
         << "\n";
  }
  md << "\n| method | identity | subgroup ece | gap vs background | significant |\n"
     << "|---|---|---|---|---|\n";
  for (const auto& m : methods) {
    const json& calibration = doc["methods"][m]["calibration"];
    for (const auto& identity : identities) {
      const json& c = calibration[identity];
      md << "| " << m << " | " << identity << " | " << md_est(c["subgroup_ece"]) << " | "
         << md_est(c["gap"]) << " | " << yes_no(c["gap"]["significant"].get<bool>()) << " |\n";
    }
  }
  md << "\n";

  if (doc.contains("differences")) {
    md << "## Differences vs " << meta["baseline"].get<std::string>() << "\n\n";
    md << "| method | scope | metric | difference | significant |\n|---|---|---|---|---|\n";
    for (const auto& m : methods) {
      if (!doc["differences"].contains(m)) continue;
      const json& dj = doc["differences"][m];
      for (const auto& [metric, est] : dj["aggregate"].items()) {
        md << "| " << m << " | aggregate | " << metric << " | " << md_est(est) << " | "
           << yes_no(est["significant"].get<bool>()) << " |\n";
      }
      for (const auto& identity : identities) {
        for (const auto& [metric, est] : dj["per_identity"][identity].items()) {
          md << "| " << m << " | " << identity << " | " << metric << " | " << md_est(est)
             << " | " << yes_no(est["significant"].get<bool>()) << " |\n";
        }
      }
    }
    md << "\n";
  }

  md << "## Temperature scaling\n\n";
  md << "| method | t* | nll | ece before | ece after |\n|---|---|---|---|---|\n";
  for (const auto& m : methods) {
    const json& t = doc["methods"][m]["temperature"];
    md << "| " << m << " | " << format_fixed(t["t_star"].get<double>(), 2) << " | "
       << md_num(t["nll"]) << " | " << md_num(t["ece_before"]) << " | "
       << md_num(t["ece_after"]) << " |\n";
  }
  md << "\n";

  md << "## Per-identity thresholds\n\n";
  md << "| method | identity | gap at default | tau* | residual gap |\n|---|---|---|---|---|\n";
  for (const auto& m : methods) {
    const json& thr = doc["methods"][m]["thresholds"]["by_identity"];
    for (const auto& identity : identities) {
      const json& e = thr[identity];
      md << "| " << m << " | " << identity << " | " << md_num(e["gap_at_default"]) << " | "
         << format_fixed(e["tau_star"].get<double>(), 2) << " | " << md_num(e["residual_gap"])
         << " |\n";
    }
  }
  md << "\n";

  md << "## Risk-coverage\n\n";
  md << "| method | coverage | risk |";
  for (const auto& identity : identities) md << " gap " << identity << " |";
  md << "\n|---|---|---|";
  for (std::size_t i = 0; i < identities.size(); ++i) md << "---|";
  md << "\n";
  for (const auto& m : methods) {
    for (const auto& point : doc["methods"][m]["risk_coverage"]) {
      md << "| " << m << " | " << format_fixed(point["coverage"].get<double>(), 2) << " | "
         << md_num(point["risk"]) << " |";
      for (const auto& identity : identities) md << ' ' << md_num(point["gaps"][identity]) << " |";
      md << "\n";
    }
  }
  md << "\n";

  md << "## Tail behaviour on benign records\n\n";
  md << "| method | identity | n | mean p | frac > 0.90 | frac > 0.99 | shift vs baseline |\n"
     << "|---|---|---|---|---|---|---|\n";
  for (const auto& m : methods) {
    const json& tail = doc["methods"][m]["tail"];
    for (const auto& identity : identities) {
      const json& t = tail[identity];
      md << "| " << m << " | " << identity << " | " << t["n_benign"].get<std::int64_t>() << " | "
         << md_num(t["mean_p"]) << " | " << md_num(t["frac_above_90"]) << " | "
         << md_num(t["frac_above_99"]) << " | "
         << (t["mean_delta"].is_null() ? "-" : md_num(t["mean_delta"])) << " |\n";
    }
  }
  md << "\n";

  const json& tce = doc["top_confident_errors"];
  md << "## Most confident errors: " << tce["identity"].get<std::string>() << "\n\n";
  md << "| id |";
  for (const auto& m : methods) md << " p(" << m << ") |";
  md << " text |\n|---|";
  for (std::size_t i = 0; i < methods.size(); ++i) md << "---|";
  md << "---|\n";
  for (const auto& row : tce["rows"]) {
    md << "| " << row["id"].get<std::string>() << " |";
    for (const auto& m : methods) md << ' ' << md_num(row["p"][m]) << " |";
    md << ' ' << (row.contains("text") ? row["text"].get<std::string>() : "") << " |\n";
  }
  md << "\n";

  md << "## Summary\n\n";
  md << "| method | mean bpsn auc | significant calibration gaps | max frac > 0.99 | t* | "
        "risk ratio at min coverage |\n|---|---|---|---|---|---|\n";
  for (const auto& m : methods) {
    const json& s = doc["summary"][m];
    md << "| " << m << " | " << md_num(s["mean_bpsn_auc"]) << " | "
       << s["n_significant_calibration_gaps"].get<int>() << " | "
       << md_num(s["max_tail_frac_above_99"]) << " | "
       << format_fixed(s["t_star"].get<double>(), 2) << " | "
       << md_num(s["risk_ratio_min_coverage"]) << " |\n";
  }
  return md.str();
}

std::vector<std::pair<std::string, std::string>> render_csv_tables(const AuditReport& report) {
  const json& doc = doc_of(report);
  auto methods = method_list(doc);
  auto identities = identity_list(doc);
  std::vector<std::pair<std::string, std::string>> tables;

  {
    std::ostringstream out;
    out << "identity,total,positives,negatives\n";
    for (const auto& [identity, counts] : doc["census"].items()) {
      out << identity << ',' << counts["total"].get<std::int64_t>() << ','
          << counts["positives"].get<std::int64_t>() << ','
          << counts["negatives"].get<std::int64_t>() << "\n";
    }
    tables.emplace_back("census.csv", out.str());
  }

  {
    std::ostringstream out;
    out << "method,metric,point,lo,hi,significant,fragile,used,skipped\n";
    for (const auto& m : methods) {
      for (const auto& [metric, est] : doc["methods"][m]["aggregate"].items()) {
        out << m << ',' << metric << ',';
        csv_est_fields(out, est);
        out << "\n";
      }
      if (doc["methods"][m].contains("background_ece")) {
        out << m << ",background_ece,";
        csv_est_fields(out, doc["methods"][m]["background_ece"]);
        out << "\n";
      }
    }
    tables.emplace_back("aggregate.csv", out.str());
  }

  {
    std::ostringstream out;
    out << "method,identity,metric,point,lo,hi,significant,fragile,used,skipped\n";
    for (const auto& m : methods) {
      for (const auto& identity : identities) {
        for (const auto& [metric, est] : doc["methods"][m]["ranking"][identity].items()) {
          out << m << ',' << identity << ',' << metric << ',';
          csv_est_fields(out, est);
          out << "\n";
        }
        for (const auto& [metric, est] : doc["methods"][m]["calibration"][identity].items()) {
          out << m << ',' << identity << ',' << metric << ',';
          csv_est_fields(out, est);
          out << "\n";
        }
      }
    }
    tables.emplace_back("per_identity.csv", out.str());
  }

  if (doc.contains("differences")) {
    std::ostringstream out;
    out << "method,scope,metric,point,lo,hi,significant,fragile,used,skipped\n";
    for (const auto& m : methods) {
      if (!doc["differences"].contains(m)) continue;
      const json& dj = doc["differences"][m];
      for (const auto& [metric, est] : dj["aggregate"].items()) {
        out << m << ",aggregate," << metric << ',';
        csv_est_fields(out, est);
        out << "\n";
      }
      for (const auto& identity : identities) {
        for (const auto& [metric, est] : dj["per_identity"][identity].items()) {
          out << m << ',' << identity << ',' << metric << ',';
          csv_est_fields(out, est);
          out << "\n";
        }
      }
    }
    tables.emplace_back("differences.csv", out.str());
  }

  {
    std::ostringstream out;
    out << "method,t_star,nll,ece_before,ece_after\n";
    for (const auto& m : methods) {
      const json& t = doc["methods"][m]["temperature"];
      out << m << ',' << csv_num(t["t_star"]) << ',' << csv_num(t["nll"]) << ','
          << csv_num(t["ece_before"]) << ',' << csv_num(t["ece_after"]) << "\n";
    }
    tables.emplace_back("temperature.csv", out.str());
  }

  {
    std::ostringstream out;
    out << "method,identity,gap_at_default,tau_star,residual_gap,background_error\n";
    for (const auto& m : methods) {
      const json& thr = doc["methods"][m]["thresholds"];
      for (const auto& identity : identities) {
        const json& e = thr["by_identity"][identity];
        out << m << ',' << identity << ',' << csv_num(e["gap_at_default"]) << ','
            << csv_num(e["tau_star"]) << ',' << csv_num(e["residual_gap"]) << ','
            << csv_num(thr["background_error"]) << "\n";
      }
    }
    tables.emplace_back("thresholds.csv", out.str());
  }

  {
    std::ostringstream out;
    out << "method,coverage,risk";
    for (const auto& identity : identities) out << ",gap_" << identity;
    out << "\n";
    for (const auto& m : methods) {
      for (const auto& point : doc["methods"][m]["risk_coverage"]) {
        out << m << ',' << csv_num(point["coverage"]) << ',' << csv_num(point["risk"]);
        for (const auto& identity : identities) out << ',' << csv_num(point["gaps"][identity]);
        out << "\n";
      }
    }
    tables.emplace_back("risk_coverage.csv", out.str());
  }

  {
    std::ostringstream out;
    out << "method,identity,n_benign,mean_p,frac_above_90,frac_above_99,mean_delta\n";
    for (const auto& m : methods) {
      for (const auto& identity : identities) {
        const json& t = doc["methods"][m]["tail"][identity];
        out << m << ',' << identity << ',' << t["n_benign"].get<std::int64_t>() << ','
            << csv_num(t["mean_p"]) << ',' << csv_num(t["frac_above_90"]) << ','
            << csv_num(t["frac_above_99"]) << ',' << csv_num(t["mean_delta"]) << "\n";
      }
    }
    tables.emplace_back("tail.csv", out.str());
  }

  {
    std::ostringstream out;
    out << "method,slice,bin_lo,bin_hi,count,mean_p,frac_positive\n";
    for (const auto& m : methods) {
      for (const auto& [slice, rows] : doc["methods"][m]["reliability"].items()) {
        for (const auto& bin : rows) {
          out << m << ',' << slice << ',' << csv_num(bin["bin_lo"]) << ','
              << csv_num(bin["bin_hi"]) << ',' << bin["count"].get<std::int64_t>() << ','
              << csv_num(bin["mean_p"]) << ',' << csv_num(bin["frac_positive"]) << "\n";
        }
      }
    }
    tables.emplace_back("reliability.csv", out.str());
  }

  {
    const json& tce = doc["top_confident_errors"];
    std::ostringstream out;
    out << "rank,identity,id";
    for (const auto& m : methods) out << ",p_" << m;
    out << ",text\n";
    int rank = 1;
    for (const auto& row : tce["rows"]) {
      out << rank++ << ',' << tce["identity"].get<std::string>() << ','
          << row["id"].get<std::string>();
      for (const auto& m : methods) out << ',' << csv_num(row["p"][m]);
      std::string text = row.contains("text") ? row["text"].get<std::string>() : "";
      // Minimal CSV quoting for the free-text column.
      if (text.find_first_of(",\"\r\n") != std::string::npos) {
        std::string quoted = "\"";
        for (char c : text) {
          if (c == '"') quoted += "\"\"";
          else quoted.push_back(c);
        }
        quoted.push_back('"');
        text = std::move(quoted);
      }
      out << ',' << text << "\n";
    }
    tables.emplace_back("top_confident_errors.csv", out.str());
  }

  return tables;
}

void write_report_files(const AuditReport& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "tables", ec);
  if (ec) throw AuditError("cannot create '" + (out_dir / "tables").string() + "'");

  auto write_file = [](const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw AuditError("cannot write '" + path.string() + "'");
    out << content;
  };
  write_file(out_dir / "report.json", report.to_json());
  write_file(out_dir / "report.md", render_markdown(report));
  for (const auto& [name, content] : render_csv_tables(report))
    write_file(out_dir / "tables" / name, content);
}

}  // namespace fairaudit
