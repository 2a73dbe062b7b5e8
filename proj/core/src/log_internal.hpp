#pragma once

#include <spdlog/spdlog.h>

namespace maskseq::detail {

/// Library logger writing to stderr; never stdout, which the CLI reserves for
/// machine-readable output.
spdlog::logger& logger();

}  // namespace maskseq::detail
