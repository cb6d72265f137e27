#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fairaudit {

// Reserved identity tag for records that mention no identity term.
inline constexpr const char* kBackground = "background";

// One scored example. identity carries exactly one tag per record; audits
// that need multi-tag examples should duplicate the record per tag upstream.
struct PredictionRecord {
  std::string id;
  double p = 0.0;  // predicted probability of the positive (toxic) class
  int y = 0;       // binary reference label
  std::string identity = kBackground;
  std::optional<std::string> text;  // optional pass-through for qualitative tables

  bool operator==(const PredictionRecord&) const = default;
};

// Ordered, validated collection of records from one scoring method.
// Record order is ingestion order and is part of the value: paired
// evaluation aligns methods by position.
class PredictionSet {
public:
  PredictionSet() = default;
  PredictionSet(std::string name, std::vector<PredictionRecord> records);

  const std::string& name() const { return name_; }
  const std::vector<PredictionRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  PredictionSet with_name(std::string name) const;

private:
  std::string name_;
  std::vector<PredictionRecord> records_;
};

// Same examples scored by several methods. Sets must agree on (id, y,
// identity) at every position; only p may differ. Iteration order is
// insertion order, so the first added set acts as the table baseline.
class PairedPredictions {
public:
  void add(PredictionSet set);

  const PredictionSet& set(std::string_view method) const;
  bool has(std::string_view method) const;
  const std::vector<PredictionSet>& sets() const { return sets_; }
  std::vector<std::string> methods() const;
  std::size_t n_methods() const { return sets_.size(); }
  std::size_t n_records() const { return sets_.empty() ? 0 : sets_.front().size(); }

private:
  std::vector<PredictionSet> sets_;
};

struct GroupCounts {
  std::int64_t total = 0;
  std::int64_t positives = 0;
  std::int64_t negatives = 0;
};

// Per-identity counts; std::map keeps iteration deterministic.
struct GroupCensus {
  std::map<std::string, GroupCounts> counts;

  const GroupCounts& at(std::string_view identity) const;
  bool has(std::string_view identity) const;
};

GroupCensus census(const PredictionSet& set);

// 1 iff raw_score >= threshold; scores exactly at threshold are positive.
inline int binarize(double raw_score, double threshold) { return raw_score >= threshold ? 1 : 0; }

// A named index subset used by the metric layer. Indices are positions
// within the originating PredictionSet, ascending.
struct EvalSlice {
  std::string name;
  std::vector<std::int32_t> indices;
};

struct SliceOptions {
  std::int64_t min_n = 50;               // identities below this are excluded
  std::int64_t bnsp_min_positives = 50;  // bnsp slice needs this many subgroup positives
};

// Slices for every qualifying identity: the subgroup itself, its
// bpsn(identity) composite (subgroup negatives + background positives) and,
// when the subgroup has enough positives, its bnsp(identity) composite
// (subgroup positives + background negatives). The background slice is
// always first.
std::vector<EvalSlice> make_slices(const PredictionSet& set, const SliceOptions& opts = {});

// Identities meeting min_n, background excluded, sorted lexicographically.
std::vector<std::string> qualifying_identities(const GroupCensus& c, std::int64_t min_n);

// Identities present but below min_n, sorted; reported, never analyzed.
std::vector<std::string> excluded_identities(const GroupCensus& c, std::int64_t min_n);

}  // namespace fairaudit
