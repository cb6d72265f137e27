#include "fairaudit/records.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "fairaudit/error.hpp"

namespace fairaudit {

namespace {

void validate_records(const std::string& name, const std::vector<PredictionRecord>& records) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.id.empty())
      throw AuditError("set '" + name + "': record " + std::to_string(i) + " has an empty id");
    if (!std::isfinite(r.p) || r.p < 0.0 || r.p > 1.0)
      throw AuditError("set '" + name + "': record '" + r.id + "' has p outside [0,1]");
    if (r.y != 0 && r.y != 1)
      throw AuditError("set '" + name + "': record '" + r.id + "' has non-binary label");
    if (r.identity.empty())
      throw AuditError("set '" + name + "': record '" + r.id + "' has an empty identity tag");
    if (!seen.insert(r.id).second)
      throw AuditError("set '" + name + "': duplicate id '" + r.id + "'");
  }
}

}  // namespace

PredictionSet::PredictionSet(std::string name, std::vector<PredictionRecord> records)
    : name_(std::move(name)), records_(std::move(records)) {
  if (name_.empty()) throw AuditError("prediction set needs a non-empty name");
  validate_records(name_, records_);
}

PredictionSet PredictionSet::with_name(std::string name) const {
  PredictionSet out;
  out.name_ = std::move(name);
  if (out.name_.empty()) throw AuditError("prediction set needs a non-empty name");
  out.records_ = records_;
  return out;
}

void PairedPredictions::add(PredictionSet set) {
  for (const auto& existing : sets_)
    if (existing.name() == set.name())
      throw AuditError("duplicate method name '" + set.name() + "'");
  if (!sets_.empty()) {
    const auto& base = sets_.front();
    if (base.size() != set.size())
      throw AuditError("method '" + set.name() + "' has " + std::to_string(set.size()) +
                       " records, expected " + std::to_string(base.size()));
    for (std::size_t i = 0; i < base.size(); ++i) {
      const auto& a = base.records()[i];
      const auto& b = set.records()[i];
      if (a.id != b.id || a.y != b.y || a.identity != b.identity)
        throw AuditError("method '" + set.name() + "' is not paired with '" + base.name() +
                         "': first mismatch at position " + std::to_string(i) + " (id '" +
                         a.id + "' vs '" + b.id + "')");
    }
  }
  sets_.push_back(std::move(set));
}

const PredictionSet& PairedPredictions::set(std::string_view method) const {
  for (const auto& s : sets_)
    if (s.name() == method) return s;
  throw AuditError("unknown method '" + std::string(method) + "'");
}

bool PairedPredictions::has(std::string_view method) const {
  return std::any_of(sets_.begin(), sets_.end(),
                     [&](const auto& s) { return s.name() == method; });
}

std::vector<std::string> PairedPredictions::methods() const {
  std::vector<std::string> out;
  out.reserve(sets_.size());
  for (const auto& s : sets_) out.push_back(s.name());
  return out;
}

const GroupCounts& GroupCensus::at(std::string_view identity) const {
  auto it = counts.find(std::string(identity));
  if (it == counts.end())
    throw AuditError("identity '" + std::string(identity) + "' not present");
  return it->second;
}

bool GroupCensus::has(std::string_view identity) const {
  return counts.find(std::string(identity)) != counts.end();
}

GroupCensus census(const PredictionSet& set) {
  if (set.empty()) throw AuditError("census of empty set '" + set.name() + "'");
  GroupCensus c;
  for (const auto& r : set.records()) {
    auto& g = c.counts[r.identity];
    g.total += 1;
    (r.y ? g.positives : g.negatives) += 1;
  }
  return c;
}

std::vector<std::string> qualifying_identities(const GroupCensus& c, std::int64_t min_n) {
  std::vector<std::string> out;
  for (const auto& [identity, counts] : c.counts) {
    if (identity == kBackground) continue;
    if (counts.total >= min_n) out.push_back(identity);
  }
  return out;  // map order is already sorted
}

std::vector<std::string> excluded_identities(const GroupCensus& c, std::int64_t min_n) {
  std::vector<std::string> out;
  for (const auto& [identity, counts] : c.counts) {
    if (identity == kBackground) continue;
    if (counts.total < min_n) out.push_back(identity);
  }
  return out;
}

std::vector<EvalSlice> make_slices(const PredictionSet& set, const SliceOptions& opts) {
  GroupCensus c = census(set);
  if (!c.has(kBackground))
    throw AuditError("set '" + set.name() + "' has no background records");

  const auto& records = set.records();
  auto indices_of = [&](auto&& keep) {
    std::vector<std::int32_t> idx;
    for (std::size_t i = 0; i < records.size(); ++i)
      if (keep(records[i])) idx.push_back(static_cast<std::int32_t>(i));
    return idx;
  };

  std::vector<EvalSlice> slices;
  slices.push_back({kBackground, indices_of([](const PredictionRecord& r) {
                      return r.identity == kBackground;
                    })});

  for (const auto& identity : qualifying_identities(c, opts.min_n)) {
    slices.push_back({identity, indices_of([&](const PredictionRecord& r) {
                        return r.identity == identity;
                      })});
    slices.push_back({"bpsn(" + identity + ")", indices_of([&](const PredictionRecord& r) {
                        return (r.identity == identity && r.y == 0) ||
                               (r.identity == kBackground && r.y == 1);
                      })});
    if (c.at(identity).positives >= opts.bnsp_min_positives) {
      slices.push_back({"bnsp(" + identity + ")", indices_of([&](const PredictionRecord& r) {
                          return (r.identity == identity && r.y == 1) ||
                                 (r.identity == kBackground && r.y == 0);
                        })});
    }
  }
  return slices;
}

}  // namespace fairaudit
