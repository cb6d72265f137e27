#include "fairaudit/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fairaudit/error.hpp"
#include "fairaudit/numeric.hpp"

namespace fairaudit {

namespace {

using nlohmann::json;

struct CsvRow {
  std::vector<std::string> fields;
  std::size_t line = 0;  // line the row starts on
};

// RFC-4180: quoted fields may contain commas, quotes ("" escapes) and
// newlines; rows end on a bare LF or CRLF.
std::vector<CsvRow> parse_csv(const std::string& text) {
  std::vector<CsvRow> rows;
  CsvRow row;
  row.line = 1;
  std::string field;
  bool in_quotes = false;
  bool row_has_data = false;
  std::size_t line = 1;

  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row = CsvRow{};
    row.line = line;
    row_has_data = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\n') ++line;
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty())
          throw ParseError("quote inside unquoted field", line);
        in_quotes = true;
        row_has_data = true;
        break;
      case ',':
        end_field();
        row_has_data = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;  // CRLF, handled at LF
        [[fallthrough]];
      case '\n':
        if (row_has_data || !row.fields.empty()) {
          end_row();
          row.line = line;
        } else {
          row.line = line;  // skip blank line
        }
        break;
      default:
        field.push_back(c);
        row_has_data = true;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", line);
  if (row_has_data || !row.fields.empty()) end_row();
  return rows;
}

double parse_double(const std::string& s, const char* what, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError(std::string("bad ") + what + " value '" + s + "'", line);
  return v;
}

int parse_label(const std::string& s, std::size_t line) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw ParseError("bad y value '" + s + "', expected 0 or 1", line);
}

double probability_from(bool have_p, double p, double lg, std::size_t line) {
  if (have_p) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0)
      throw ParseError("p outside [0,1]", line);
    return p;
  }
  if (!std::isfinite(lg)) throw ParseError("non-finite logit", line);
  return sigmoid(lg);
}

PredictionSet load_csv(std::istream& in, std::string name) {
  std::ostringstream buf;
  buf << in.rdbuf();
  auto rows = parse_csv(buf.str());
  if (rows.empty()) throw ParseError("empty csv input", 0);

  const auto& header = rows.front().fields;
  auto col = [&](std::string_view want) -> int {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == want) return static_cast<int>(i);
    return -1;
  };
  int c_id = col("id"), c_p = col("p"), c_logit = col("logit");
  int c_y = col("y"), c_identity = col("identity"), c_text = col("text");
  if (c_id < 0) throw ParseError("missing required column 'id'", rows.front().line);
  if (c_y < 0) throw ParseError("missing required column 'y'", rows.front().line);
  if (c_p < 0 && c_logit < 0)
    throw ParseError("need a 'p' or 'logit' column", rows.front().line);
  if (c_p >= 0 && c_logit >= 0)
    throw ParseError("columns 'p' and 'logit' are mutually exclusive", rows.front().line);

  std::vector<PredictionRecord> records;
  records.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != header.size())
      throw ParseError("row has " + std::to_string(row.fields.size()) + " fields, header has " +
                           std::to_string(header.size()),
                       row.line);
    PredictionRecord rec;
    rec.id = row.fields[static_cast<std::size_t>(c_id)];
    double p = 0.0, lg = 0.0;
    if (c_p >= 0) p = parse_double(row.fields[static_cast<std::size_t>(c_p)], "p", row.line);
    if (c_logit >= 0)
      lg = parse_double(row.fields[static_cast<std::size_t>(c_logit)], "logit", row.line);
    rec.p = probability_from(c_p >= 0, p, lg, row.line);
    rec.y = parse_label(row.fields[static_cast<std::size_t>(c_y)], row.line);
    if (c_identity >= 0 && !row.fields[static_cast<std::size_t>(c_identity)].empty())
      rec.identity = row.fields[static_cast<std::size_t>(c_identity)];
    if (c_text >= 0 && !row.fields[static_cast<std::size_t>(c_text)].empty())
      rec.text = row.fields[static_cast<std::size_t>(c_text)];
    records.push_back(std::move(rec));
  }
  return PredictionSet(std::move(name), std::move(records));
}

PredictionSet load_jsonl(std::istream& in, std::string name) {
  std::vector<PredictionRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("bad json: ") + e.what(), lineno);
    }
    if (!obj.is_object()) throw ParseError("expected a json object", lineno);

    PredictionRecord rec;
    if (!obj.contains("id")) throw ParseError("missing key 'id'", lineno);
    const auto& idv = obj["id"];
    if (idv.is_string())
      rec.id = idv.get<std::string>();
    else if (idv.is_number_integer())
      rec.id = std::to_string(idv.get<std::int64_t>());
    else
      throw ParseError("key 'id' must be a string or integer", lineno);

    bool have_p = obj.contains("p"), have_logit = obj.contains("logit");
    if (have_p == have_logit)
      throw ParseError("need exactly one of 'p' or 'logit'", lineno);
    if (have_p) {
      if (!obj["p"].is_number()) throw ParseError("key 'p' must be a number", lineno);
      rec.p = probability_from(true, obj["p"].get<double>(), 0.0, lineno);
    } else {
      if (!obj["logit"].is_number()) throw ParseError("key 'logit' must be a number", lineno);
      rec.p = probability_from(false, 0.0, obj["logit"].get<double>(), lineno);
    }

    if (!obj.contains("y")) throw ParseError("missing key 'y'", lineno);
    const auto& yv = obj["y"];
    if (yv.is_boolean())
      rec.y = yv.get<bool>() ? 1 : 0;
    else if (yv.is_number_integer() &&
             (yv.get<std::int64_t>() == 0 || yv.get<std::int64_t>() == 1))
      rec.y = static_cast<int>(yv.get<std::int64_t>());
    else
      throw ParseError("key 'y' must be 0, 1 or a boolean", lineno);

    if (obj.contains("identity")) {
      if (!obj["identity"].is_string())
        throw ParseError("key 'identity' must be a string", lineno);
      auto s = obj["identity"].get<std::string>();
      if (!s.empty()) rec.identity = std::move(s);
    }
    if (obj.contains("text")) {
      if (!obj["text"].is_string()) throw ParseError("key 'text' must be a string", lineno);
      rec.text = obj["text"].get<std::string>();
    }
    records.push_back(std::move(rec));
  }
  return PredictionSet(std::move(name), std::move(records));
}

std::string csv_escape(const std::string& s) {
  bool needs_quotes = s.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quotes) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void save_csv(const PredictionSet& set, std::ostream& out) {
  bool any_text = false;
  for (const auto& r : set.records())
    if (r.text) any_text = true;
  out << "id,p,y,identity";
  if (any_text) out << ",text";
  out << "\n";
  for (const auto& r : set.records()) {
    out << csv_escape(r.id) << ',' << format_double(r.p) << ',' << r.y << ','
        << csv_escape(r.identity);
    if (any_text) out << ',' << csv_escape(r.text ? *r.text : std::string());
    out << "\n";
  }
}

void save_jsonl(const PredictionSet& set, std::ostream& out) {
  for (const auto& r : set.records()) {
    json obj;
    obj["id"] = r.id;
    obj["identity"] = r.identity;
    obj["p"] = r.p;
    if (r.text) obj["text"] = *r.text;
    obj["y"] = r.y;
    out << obj.dump() << "\n";
  }
}

}  // namespace

FileFormat detect_format(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  if (ext == ".csv") return FileFormat::Csv;
  if (ext == ".jsonl" || ext == ".ndjson" || ext == ".json") return FileFormat::Jsonl;
  throw AuditError("cannot infer format from '" + path.string() +
                   "'; pass the format explicitly");
}

PredictionSet load_predictions(const std::filesystem::path& path, FileFormat format,
                               std::string name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AuditError("cannot open '" + path.string() + "'");
  if (name.empty()) name = path.stem().string();
  return load_predictions(in, format, std::move(name));
}

PredictionSet load_predictions(std::istream& in, FileFormat format, std::string name) {
  if (name.empty()) throw AuditError("stream input needs an explicit set name");
  return format == FileFormat::Csv ? load_csv(in, std::move(name))
                                   : load_jsonl(in, std::move(name));
}

void save_predictions(const PredictionSet& set, const std::filesystem::path& path,
                      FileFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw AuditError("cannot write '" + path.string() + "'");
  save_predictions(set, out, format);
}

void save_predictions(const PredictionSet& set, std::ostream& out, FileFormat format) {
  if (format == FileFormat::Csv)
    save_csv(set, out);
  else
    save_jsonl(set, out);
}

std::string bytes_digest_hex(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hex[h & 0xF];
    h >>= 4;
  }
  return out;
}

std::string file_digest_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AuditError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return bytes_digest_hex(buf.str());
}

}  // namespace fairaudit
