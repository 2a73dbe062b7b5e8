// libFuzzer entry for the answer parser. Anything other than ParseError
// escaping, or a sanitizer report, is a bug.

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "maskseq/codec.hpp"
#include "maskseq/error.hpp"

extern "C" int LLVMFuzzerTestOneInput(const std::uint8_t* data, std::size_t size) {
  const std::string_view text(reinterpret_cast<const char*>(data), size);
  for (const auto mode : {maskseq::ParseMode::kStrict, maskseq::ParseMode::kLenient}) {
    for (const auto expect : {maskseq::ExpectKind::kBoxes, maskseq::ExpectKind::kMasks}) {
      try {
        const auto out = maskseq::parse_grounding(text, mode, expect);
        // Whatever parses must survive a strict round trip.
        if (!(maskseq::parse_grounding(maskseq::serialize(out), maskseq::ParseMode::kStrict,
                                       expect) == out)) {
          __builtin_trap();
        }
      } catch (const maskseq::ParseError&) {
      }
    }
  }
  return 0;
}
