#pragma once

#include <string_view>

namespace maskseq {

/// Configures the library logger (stderr). The level comes from `level` when
/// non-empty, otherwise from the MASKSEQ_LOG environment variable
/// (trace|debug|info|warn|error|critical|off), defaulting to "warn".
void init_logging(std::string_view level = {});

}  // namespace maskseq
