#include "maskseq/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>

#include <cstdlib>
#include <memory>
#include <string>

#include "log_internal.hpp"
#include "maskseq/version.hpp"

namespace maskseq {

const char* version() noexcept { return kVersion; }

namespace {

spdlog::level::level_enum level_from(std::string_view level) {
  std::string name(level);
  if (name.empty()) {
    const char* env = std::getenv("MASKSEQ_LOG");
    name = env != nullptr && *env != '\0' ? env : "warn";
  }
  return spdlog::level::from_str(name);
}

}  // namespace

namespace detail {

spdlog::logger& logger() {
  static const std::shared_ptr<spdlog::logger> instance = [] {
    auto l = std::make_shared<spdlog::logger>(
        "maskseq", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    l->set_pattern("[maskseq %l] %v");
    l->set_level(level_from({}));
    return l;
  }();
  return *instance;
}

}  // namespace detail

void init_logging(std::string_view level) { detail::logger().set_level(level_from(level)); }

}  // namespace maskseq
