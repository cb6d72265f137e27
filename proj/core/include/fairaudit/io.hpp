#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "fairaudit/records.hpp"

namespace fairaudit {

enum class FileFormat { Csv, Jsonl };

// Extension-based detection: .csv, and .jsonl/.ndjson/.json. Anything else
// is an error; callers that know better pass the format explicitly.
FileFormat detect_format(const std::filesystem::path& path);

// CSV: RFC-4180 with a header row. Required columns: id, y, and exactly one
// of p (probability) or logit (mapped through the logistic function).
// Optional columns: identity (empty or missing means background) and text.
// Unknown columns are ignored. JSONL: one object per line with the same
// keys. Loading validates every record: p finite in [0,1], y in {0,1},
// non-empty unique ids.
PredictionSet load_predictions(const std::filesystem::path& path, FileFormat format,
                               std::string name = "");
PredictionSet load_predictions(std::istream& in, FileFormat format, std::string name);

// Writers emit shortest round-trip decimals, so load(save(x)) == x down to
// the bit pattern of every p.
void save_predictions(const PredictionSet& set, const std::filesystem::path& path,
                      FileFormat format);
void save_predictions(const PredictionSet& set, std::ostream& out, FileFormat format);

// FNV-1a/64 of a file's raw bytes, as 16 hex digits; audit reports carry it
// so a report can be matched to its exact inputs later.
std::string file_digest_hex(const std::filesystem::path& path);
std::string bytes_digest_hex(std::string_view bytes);

}  // namespace fairaudit
