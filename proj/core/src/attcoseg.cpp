#include "maskseq/attcoseg.hpp"

#include <algorithm>
#include <charconv>
#include <random>
#include <set>

#include "maskseq/error.hpp"
#include "maskseq/jsonl.hpp"
#include "maskseq/mask_io.hpp"
#include "maskseq/parallel.hpp"
#include "maskseq/random.hpp"

namespace maskseq {

namespace {

constexpr std::string_view kAnswerHead = "images ";
constexpr std::string_view kAnswerJoin = " and ";
constexpr std::string_view kAnswerTail = ": ";

struct Slot {
  std::string image;
  int positive = -1;  // 0 or 1 for the pair items
};

std::size_t parse_index(std::string_view text, std::size_t& pos, std::size_t base) {
  std::size_t value = 0;
  const auto res = std::from_chars(text.data() + pos, text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr == text.data() + pos) {
    throw ParseError("expected an image index", base + pos);
  }
  pos = static_cast<std::size_t>(res.ptr - text.data());
  return value;
}

void expect(std::string_view text, std::size_t& pos, std::string_view word) {
  if (text.substr(pos, word.size()) != word) {
    throw ParseError("expected '" + std::string(word) + "'", pos);
  }
  pos += word.size();
}

InstructionRecord build_one(const AttCoSegPair& pair, std::span<const std::string> negatives,
                            const AttCoSegOptions& opt) {
  std::mt19937_64 rng(item_seed(opt.seed, pair.id));

  const std::size_t n_neg = opt.k_images - 2;
  std::vector<std::size_t> pool(negatives.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  // Partial Fisher-Yates: the first n_neg entries are a uniform draw without
  // replacement.
  for (std::size_t i = 0; i < n_neg; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, pool.size() - i));
    std::swap(pool[i], pool[j]);
  }

  std::vector<Slot> slots;
  slots.push_back({pair.items[0].image, 0});
  slots.push_back({pair.items[1].image, 1});
  for (std::size_t i = 0; i < n_neg; ++i) slots.push_back({negatives[pool[i]], -1});

  std::set<std::string> seen;
  for (const auto& s : slots) {
    if (!seen.insert(s.image).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate image '" + s.image + "' in group " + pair.id);
    }
  }
  shuffle(slots, rng);

  std::array<std::size_t, 2> where{};
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].positive >= 0) where[static_cast<std::size_t>(slots[i].positive)] = i;
  }
  const std::size_t first_item = where[0] < where[1] ? 0 : 1;
  std::vector<QuantSeq> seqs;
  for (const std::size_t item : {first_item, 1 - first_item}) {
    const BinaryMask& mask = pair.items[item].mask;
    const QuantConfig qcfg = QuantConfig::for_image(mask.width(), mask.height(), opt.n_bins);
    seqs.push_back(encode_mask(mask, qcfg, opt.sampling, opt.method));
  }

  InstructionRecord r;
  r.id = opt.source + "-" + pair.id;
  r.task = Task::kAttCoSeg;
  r.split = pair.split;
  for (const auto& s : slots) r.images.push_back(s.image);
  r.instruction = TemplateRegistry::builtin().render(Task::kAttCoSeg, {}, item_seed(opt.seed, r.id),
                                                    slots.size());
  const std::size_t lo = std::min(where[0], where[1]);
  const std::size_t hi = std::max(where[0], where[1]);
  r.target = format_attcoseg_answer(lo, hi, serialize(GroundingOutput::from_masks(std::move(seqs))));
  r.meta.source = opt.source;
  r.meta.positives = {lo, hi};
  return r;
}

}  // namespace

AttCoSegPair attcoseg_pair_from_json(const nlohmann::json& j, std::size_t line) {
  try {
    AttCoSegPair p;
    p.id = j.contains("id") ? (j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump())
                            : std::to_string(line);
    p.split = j.value("split", std::string{});
    const auto& items = j.at("items");
    if (!items.is_array() || items.size() != 2) {
      throw ParseError("a pair needs exactly 2 items", line, true);
    }
    for (std::size_t i = 0; i < 2; ++i) {
      const auto& it = items[i];
      const auto w = it.at("width").get<std::uint32_t>();
      const auto h = it.at("height").get<std::uint32_t>();
      p.items[i].image = it.at("image").get<std::string>();
      p.items[i].mask = mask_from_segmentation(it.at("segmentation"), w, h);
      if (!p.items[i].mask.any()) {
        throw ParseError("positive item " + std::to_string(i) + " has an empty mask", line, true);
      }
    }
    return p;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("malformed pair: ") + e.what(), line, true);
  }
}

ConversionResult build_attcoseg(std::span<const AttCoSegPair> pairs,
                                std::span<const std::string> negatives,
                                const AttCoSegOptions& options) {
  if (options.k_images < 2) {
    throw Error(ErrorCode::kInvalidArgument, "k_images must be at least 2");
  }
  options.sampling.validate();
  if (negatives.size() < options.k_images - 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "pool too small: " + std::to_string(negatives.size()) + " negatives for " +
                    std::to_string(options.k_images - 2) + " per group");
  }

  ConversionResult result;
  result.records.resize(pairs.size());
  parallel_for(pairs.size(), options.jobs,
               [&](std::size_t i) { result.records[i] = build_one(pairs[i], negatives, options); });
  result.stats.records = result.records.size();
  return result;
}

ConversionResult build_attcoseg_files(const std::filesystem::path& pairs,
                                      const std::filesystem::path& negatives,
                                      const AttCoSegOptions& options) {
  std::vector<AttCoSegPair> parsed;
  for_each_jsonl(pairs, [&](const nlohmann::json& j, std::size_t line) {
    parsed.push_back(attcoseg_pair_from_json(j, line));
  });
  std::vector<std::string> pool;
  for_each_jsonl(negatives, [&](const nlohmann::json& j, std::size_t line) {
    if (!j.is_object() || !j.contains("image") || !j["image"].is_string()) {
      throw ParseError("negative lines need a string 'image'", line, true);
    }
    pool.push_back(j["image"].get<std::string>());
  });
  return build_attcoseg(parsed, pool, options);
}

std::string format_attcoseg_answer(std::size_t first, std::size_t second,
                                   std::string_view grounding) {
  std::string out(kAnswerHead);
  out += std::to_string(first);
  out += kAnswerJoin;
  out += std::to_string(second);
  out += kAnswerTail;
  out += grounding;
  return out;
}

AttCoSegAnswer split_attcoseg_answer(std::string_view target) {
  std::size_t pos = 0;
  AttCoSegAnswer a;
  expect(target, pos, kAnswerHead);
  a.positives[0] = parse_index(target, pos, 0);
  expect(target, pos, kAnswerJoin);
  a.positives[1] = parse_index(target, pos, 0);
  expect(target, pos, kAnswerTail);
  if (a.positives[0] >= a.positives[1]) {
    throw ParseError("image indices must be ascending and distinct", 0);
  }
  a.grounding = std::string(target.substr(pos));
  return a;
}

}  // namespace maskseq
