#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "maskseq/attcoseg.hpp"
#include "maskseq/error.hpp"

using namespace maskseq;

namespace {

const std::filesystem::path kFixtures = MASKSEQ_FIXTURE_DIR;

AttCoSegPair make_pair(const std::string& id, const std::string& a, const std::string& b) {
  AttCoSegPair p;
  p.id = id;
  p.split = "train";
  p.items[0].image = a;
  p.items[0].mask = BinaryMask(20, 20);
  p.items[0].mask.fill_rect(2, 2, 12, 12);
  p.items[1].image = b;
  p.items[1].mask = BinaryMask(30, 30);
  p.items[1].mask.fill_rect(5, 10, 25, 20);
  return p;
}

}  // namespace

TEST(AttCoSeg, OnePairTwoNegatives) {
  const std::vector<AttCoSegPair> pairs = {make_pair("p", "x.jpg", "y.jpg")};
  const std::vector<std::string> negatives = {"n1.jpg", "n2.jpg"};
  AttCoSegOptions opt;
  opt.k_images = 4;
  const auto res = build_attcoseg(pairs, negatives, opt);
  ASSERT_EQ(res.records.size(), 1u);
  const auto& r = res.records[0];
  ASSERT_EQ(r.images.size(), 4u);
  EXPECT_EQ(std::set<std::string>(r.images.begin(), r.images.end()),
            (std::set<std::string>{"x.jpg", "y.jpg", "n1.jpg", "n2.jpg"}));
  const auto answer = split_attcoseg_answer(r.target);
  EXPECT_LT(answer.positives[0], answer.positives[1]);
  EXPECT_LT(answer.positives[1], 4u);
  const std::set<std::string> at_positives = {r.images[answer.positives[0]],
                                              r.images[answer.positives[1]]};
  EXPECT_EQ(at_positives, (std::set<std::string>{"x.jpg", "y.jpg"}));
  const auto out = parse_grounding(answer.grounding, ParseMode::kStrict, ExpectKind::kMasks);
  EXPECT_EQ(out.masks().size(), 2u);
  EXPECT_EQ(r.meta.positives,
            (std::vector<std::size_t>{answer.positives[0], answer.positives[1]}));
  EXPECT_EQ(count_image_markers(r.instruction), 4u);
  EXPECT_TRUE(validate_record(r).empty());
}

TEST(AttCoSeg, MasksFollowImageOrder) {
  // The first mask in the answer belongs to the earlier positive image.
  const std::vector<AttCoSegPair> pairs = {make_pair("p", "x.jpg", "y.jpg")};
  const std::vector<std::string> negatives = {"n1.jpg", "n2.jpg", "n3.jpg"};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    AttCoSegOptions opt;
    opt.seed = seed;
    const auto r = build_attcoseg(pairs, negatives, opt).records[0];
    const auto answer = split_attcoseg_answer(r.target);
    const auto out = parse_grounding(answer.grounding, ParseMode::kStrict, ExpectKind::kMasks);
    // x.jpg's mask is a 20 x 20 image square starting at bin 100.
    const bool x_first = r.images[answer.positives[0]] == "x.jpg";
    EXPECT_EQ(out.masks()[0].coords[0].x, x_first ? 100u : 167u) << seed;
  }
}

TEST(AttCoSeg, SameSeedSameShuffle) {
  const std::vector<AttCoSegPair> pairs = {make_pair("a", "x.jpg", "y.jpg"),
                                           make_pair("b", "u.jpg", "v.jpg")};
  const std::vector<std::string> negatives = {"n1.jpg", "n2.jpg", "n3.jpg", "n4.jpg", "n5.jpg"};
  AttCoSegOptions opt;
  opt.seed = 5;
  const auto first = to_jsonl(build_attcoseg(pairs, negatives, opt).records);
  EXPECT_EQ(to_jsonl(build_attcoseg(pairs, negatives, opt).records), first);
  opt.jobs = 4;
  EXPECT_EQ(to_jsonl(build_attcoseg(pairs, negatives, opt).records), first);
  std::set<std::string> outputs;
  for (std::uint64_t s = 0; s < 10; ++s) {
    opt.seed = s;
    outputs.insert(to_jsonl(build_attcoseg(pairs, negatives, opt).records));
  }
  EXPECT_GT(outputs.size(), 1u);
}

TEST(AttCoSeg, KTwoIsADegenerateGroup) {
  const std::vector<AttCoSegPair> pairs = {make_pair("p", "x.jpg", "y.jpg")};
  AttCoSegOptions opt;
  opt.k_images = 2;
  const auto r = build_attcoseg(pairs, {}, opt).records[0];
  EXPECT_EQ(r.images.size(), 2u);
  EXPECT_EQ(r.meta.positives, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(r.target.rfind("images 0 and 1: ", 0), 0u);
}

TEST(AttCoSeg, Errors) {
  const std::vector<AttCoSegPair> pairs = {make_pair("p", "x.jpg", "y.jpg")};
  const std::vector<std::string> one = {"n1.jpg"};
  AttCoSegOptions opt;
  try {
    build_attcoseg(pairs, one, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("pool too small"), std::string::npos);
  }
  const std::vector<std::string> dup = {"n1.jpg", "x.jpg"};
  try {
    build_attcoseg(pairs, dup, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate image"), std::string::npos);
  }
  opt.k_images = 1;
  EXPECT_THROW(build_attcoseg(pairs, one, opt), Error);
}

TEST(AttCoSeg, Files) {
  AttCoSegOptions opt;
  const auto res = build_attcoseg_files(kFixtures / "attcoseg_pairs.jsonl",
                                        kFixtures / "attcoseg_negatives.jsonl", opt);
  ASSERT_EQ(res.records.size(), 2u);
  EXPECT_EQ(res.records[0].id, "attcoseg-p1");
  for (const auto& r : res.records) EXPECT_TRUE(validate_record(r).empty());
}

TEST(AttCoSegAnswer, FormatAndSplit) {
  EXPECT_EQ(format_attcoseg_answer(1, 3, "[1, 2, 3, 4, 5, 6]"), "images 1 and 3: [1, 2, 3, 4, 5, 6]");
  const auto a = split_attcoseg_answer("images 1 and 3: [1, 2, 3, 4, 5, 6]");
  EXPECT_EQ(a.positives, (std::array<std::size_t, 2>{1, 3}));
  EXPECT_EQ(a.grounding, "[1, 2, 3, 4, 5, 6]");
  EXPECT_THROW(split_attcoseg_answer("image 1 and 3: x"), ParseError);
  EXPECT_THROW(split_attcoseg_answer("images 3 and 3: x"), ParseError);
  EXPECT_THROW(split_attcoseg_answer("images a and 3: x"), ParseError);
}

TEST(AttCoSegPair, FromJson) {
  const auto j = nlohmann::json::parse(R"({"id": "q", "items": [
      {"image": "a", "width": 4, "height": 4, "segmentation": [[0, 0, 4, 0, 4, 4, 0, 4]]},
      {"image": "b", "width": 4, "height": 4, "segmentation": [[0, 0, 2, 0, 2, 2]]}]})");
  const auto p = attcoseg_pair_from_json(j, 3);
  EXPECT_EQ(p.items[0].mask.count(), 16u);
  auto bad = j;
  bad["items"].erase(1);
  try {
    attcoseg_pair_from_json(bad, 3);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 3u);
  }
}
