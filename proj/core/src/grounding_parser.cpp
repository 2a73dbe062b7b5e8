#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "maskseq/codec.hpp"
#include "maskseq/error.hpp"

namespace maskseq {

std::string_view to_string(ParseMode mode) {
  return mode == ParseMode::kStrict ? "strict" : "lenient";
}

std::string_view to_string(ExpectKind expect) {
  return expect == ExpectKind::kBoxes ? "boxes" : "masks";
}

ExpectKind parse_expect_kind(std::string_view name) {
  if (name == "boxes" || name == "box") return ExpectKind::kBoxes;
  if (name == "masks" || name == "mask") return ExpectKind::kMasks;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown target kind '" + std::string(name) + "' (expected boxes|masks)");
}

namespace {

// Values beyond this are out of range for any sane bin count; accumulation
// stops growing here so arbitrarily long digit runs cannot overflow.
constexpr std::int64_t kValueCap = std::int64_t{1} << 40;

struct Number {
  std::int64_t value = 0;
  std::size_t offset = 0;
};

class GroundingScanner {
 public:
  GroundingScanner(std::string_view text, const ParseOptions& options)
      : text_(text), opts_(options) {}

  ParseReport run() {
    skip_ws();
    if (at_end()) return {};

    std::vector<std::vector<Number>> groups;
    std::vector<std::size_t> group_offsets;
    for (;;) {
      const std::size_t open = pos_;
      std::optional<std::vector<Number>> group = parse_group();
      if (group) {
        groups.push_back(std::move(*group));
        group_offsets.push_back(open);
      }
      skip_ws();
      if (at_end()) break;
      parse_separator();
      skip_ws();
    }

    if (groups.empty()) return {GroundingOutput::no_target(), warnings_};
    if (opts_.expect == ExpectKind::kBoxes) return {build_boxes(groups, group_offsets), warnings_};
    return {build_masks(groups, group_offsets), warnings_};
  }

 private:
  bool lenient() const { return opts_.mode == ParseMode::kLenient; }
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& reason, std::size_t offset) const {
    throw ParseError(reason, offset);
  }

  // Returns nullopt for an empty group dropped in lenient mode.
  std::optional<std::vector<Number>> parse_group() {
    if (at_end() || peek() != '[') fail("expected '['", pos_);
    const std::size_t open = pos_;
    ++pos_;
    skip_ws();
    std::vector<Number> numbers;
    if (!at_end() && peek() == ']') {
      if (!lenient()) fail("empty bracket group", open);
      ++pos_;
      ++warnings_;
      return std::nullopt;
    }
    for (;;) {
      numbers.push_back(parse_number());
      skip_ws();
      if (at_end()) fail("unterminated bracket group", open);
      if (peek() == ']') {
        ++pos_;
        return numbers;
      }
      if (peek() != ',') fail("expected ',' or ']'", pos_);
      ++pos_;
      skip_ws();
      if (!at_end() && peek() == ']') {
        if (!lenient()) fail("trailing comma", pos_);
        ++warnings_;
        ++pos_;
        return numbers;
      }
    }
  }

  Number parse_number() {
    Number n{0, pos_};
    std::size_t p = pos_;
    bool negative = false;
    if (p < text_.size() && (text_[p] == '-' || text_[p] == '+')) {
      negative = text_[p] == '-';
      ++p;
    }
    const std::size_t digits_begin = p;
    std::int64_t value = 0;
    while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
      if (value < kValueCap) value = value * 10 + (text_[p] - '0');
      ++p;
    }
    if (p == digits_begin) fail("non-integer token", n.offset);

    // A fractional part is a repairable defect in lenient mode only.
    if (p < text_.size() && text_[p] == '.') {
      if (!lenient()) fail("non-integer token", n.offset);
      std::size_t q = p + 1;
      double frac = 0.0;
      double scale = 0.1;
      while (q < text_.size() && std::isdigit(static_cast<unsigned char>(text_[q]))) {
        frac += (text_[q] - '0') * scale;
        scale *= 0.1;
        ++q;
      }
      if (frac >= 0.5) ++value;
      p = q;
      ++warnings_;
    }
    if (p < text_.size() && std::isalpha(static_cast<unsigned char>(text_[p]))) {
      fail("non-integer token", n.offset);
    }
    pos_ = p;
    n.value = negative ? -value : value;
    return n;
  }

  void parse_separator() {
    const std::size_t at = pos_;
    const std::string_view rest = text_.substr(pos_);
    const std::string_view wanted =
        opts_.expect == ExpectKind::kBoxes ? kBoxSeparator : kMaskSeparator;
    const std::string_view other =
        opts_.expect == ExpectKind::kBoxes ? kMaskSeparator : kBoxSeparator;
    if (rest.starts_with(wanted)) {
      pos_ += wanted.size();
    } else if (rest.starts_with(other)) {
      if (!lenient()) fail("unexpected separator " + std::string(other), at);
      ++warnings_;
      pos_ += other.size();
    } else {
      fail("expected separator " + std::string(wanted), at);
    }
    skip_ws();
    if (at_end()) fail("separator must be followed by a group", at);
  }

  std::uint32_t to_bin(const Number& n) {
    if (n.value >= 0 && n.value < opts_.n_bins) return static_cast<std::uint32_t>(n.value);
    if (!lenient()) fail("bin out of range", n.offset);
    ++warnings_;
    return n.value < 0 ? 0 : opts_.n_bins - 1;
  }

  GroundingOutput build_boxes(const std::vector<std::vector<Number>>& groups,
                              const std::vector<std::size_t>& offsets) {
    std::vector<QuantBox> boxes;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& nums = groups[g];
      if (nums.size() != 4) {
        fail("box needs exactly 4 coordinates, got " + std::to_string(nums.size()), offsets[g]);
      }
      boxes.push_back({to_bin(nums[0]), to_bin(nums[1]), to_bin(nums[2]), to_bin(nums[3])});
    }
    return GroundingOutput::from_boxes(std::move(boxes));
  }

  GroundingOutput build_masks(const std::vector<std::vector<Number>>& groups,
                              const std::vector<std::size_t>& offsets) {
    std::vector<QuantSeq> masks;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      std::size_t count = groups[g].size();
      if (count % 2 != 0) {
        if (!lenient()) fail("odd coordinate count", offsets[g]);
        ++warnings_;
        --count;
      }
      if (count < 6) fail("fewer than 3 points", offsets[g]);
      QuantSeq seq;
      seq.coords.reserve(count / 2);
      for (std::size_t i = 0; i + 1 < count; i += 2) {
        seq.coords.push_back({to_bin(groups[g][i]), to_bin(groups[g][i + 1])});
      }
      masks.push_back(std::move(seq));
    }
    return GroundingOutput::from_masks(std::move(masks));
  }

  std::string_view text_;
  ParseOptions opts_;
  std::size_t pos_ = 0;
  std::size_t warnings_ = 0;
};

}  // namespace

ParseReport parse_grounding_report(std::string_view text, const ParseOptions& options) {
  if (options.n_bins < 2) throw Error(ErrorCode::kInvalidArgument, "n_bins must be at least 2");
  return GroundingScanner(text, options).run();
}

GroundingOutput parse_grounding(std::string_view text, ParseMode mode, ExpectKind expect,
                                std::uint32_t n_bins) {
  return parse_grounding_report(text, ParseOptions{mode, expect, n_bins}).output;
}

}  // namespace maskseq
