// Internal: the report document behind the public AuditReport handle.
#pragma once

#include <nlohmann/json.hpp>

#include "fairaudit/report.hpp"

namespace fairaudit {

struct AuditReport::Impl {
  nlohmann::json doc;
};

}  // namespace fairaudit
