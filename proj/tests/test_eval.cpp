#include <gtest/gtest.h>

#include <algorithm>

#include "countfuse/error.hpp"
#include "countfuse/eval.hpp"
#include "countfuse/random.hpp"
#include "oracles.hpp"

using namespace countfuse;

namespace {

const LabelPair kOffNot{"OFF", "NOT"};

std::vector<std::string> repeat(std::size_t n_not, std::size_t n_off) {
  std::vector<std::string> out(n_not, "NOT");
  out.insert(out.end(), n_off, "OFF");
  return out;
}

}  // namespace

TEST(Confusion, SpecExamples) {
  const std::vector<std::string> golds = {"NOT", "NOT", "NOT", "OFF"};
  const std::vector<std::string> preds = {"NOT", "NOT", "OFF", "OFF"};
  const auto cm = confusion(golds, preds, kOffNot);
  EXPECT_EQ(cm.tn(), 2u);
  EXPECT_EQ(cm.fp(), 1u);
  EXPECT_EQ(cm.fn(), 0u);
  EXPECT_EQ(cm.tp(), 1u);
  EXPECT_EQ(cm.total(), 4u);

  const auto same = confusion(golds, golds, kOffNot);
  EXPECT_EQ(same.fp() + same.fn(), 0u);

  const auto empty = confusion(std::vector<std::string>{}, std::vector<std::string>{}, kOffNot);
  EXPECT_EQ(empty.total(), 0u);
}

TEST(Confusion, ContractCases) {
  const std::vector<std::string> two = {"NOT", "OFF"};
  const std::vector<std::string> one = {"NOT"};
  try {
    confusion(two, one, kOffNot);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LengthMismatch);
  }
  const std::vector<std::string> odd = {"NOT", "MAYBE"};
  try {
    confusion(two, odd, kOffNot);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownLabel);
  }
}

TEST(Metrics, SpecExamples) {
  const std::vector<std::string> golds = {"NOT", "NOT", "NOT", "OFF"};
  const std::vector<std::string> preds = {"NOT", "NOT", "OFF", "OFF"};
  const auto r = metrics(confusion(golds, preds, kOffNot));
  EXPECT_NEAR(r.negative().f1, 0.8, 1e-12);
  EXPECT_NEAR(r.positive().f1, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.macro_f1, 0.7333333333333333, 1e-12);
  EXPECT_EQ(format_metric(r.macro_f1), "0.7333");

  const auto perfect = metrics(confusion(golds, golds, kOffNot));
  EXPECT_EQ(perfect.macro_f1, 1.0);
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(perfect.positive().precision, 1.0);

  const std::vector<std::string> never_off(4, "NOT");
  const auto r2 = metrics(confusion(golds, never_off, kOffNot));
  EXPECT_EQ(r2.positive().precision, 0.0);
  EXPECT_EQ(r2.positive().f1, 0.0);
}

TEST(Metrics, MatchesBruteForceScorer) {
  SplitMix64 rng(77);
  for (int round = 0; round < 500; ++round) {
    const auto n = rng.next_below(1001);
    std::vector<int> golds(n), preds(n);
    const double bias = rng.next_unit();
    for (std::size_t i = 0; i < n; ++i) {
      golds[i] = rng.next_unit() < bias ? kPositive : kNegative;
      preds[i] = rng.next_unit() < 0.5 ? golds[i] : static_cast<int>(rng.next_below(2));
    }
    const auto r = metrics(confusion(golds, preds, kOffNot));
    const auto b = countfuse::testing::brute_scores(golds, preds);
    for (int c = 0; c < 2; ++c) {
      EXPECT_DOUBLE_EQ(r.per_class[c].f1, b.f1[c]);
      EXPECT_DOUBLE_EQ(r.per_class[c].precision, b.precision[c]);
      EXPECT_DOUBLE_EQ(r.per_class[c].recall, b.recall[c]);
      EXPECT_GE(r.per_class[c].f1, 0.0);
      EXPECT_LE(r.per_class[c].f1, 1.0);
    }
    EXPECT_DOUBLE_EQ(r.macro_f1, b.macro);

    // swapping which class is "positive" leaves macro-F1 unchanged
    std::vector<int> g2(n), p2(n);
    for (std::size_t i = 0; i < n; ++i) {
      g2[i] = 1 - golds[i];
      p2[i] = 1 - preds[i];
    }
    EXPECT_DOUBLE_EQ(metrics(confusion(g2, p2, kOffNot)).macro_f1, r.macro_f1);
  }
}

TEST(Baseline, OlidTestDistributionAllNot) {
  // 620 NOT / 240 OFF, the OLID sub-task A test set.
  const auto golds = repeat(620, 240);
  const auto r = baseline_all("NOT", golds, kOffNot);
  EXPECT_NEAR(r.macro_f1, 0.4193, 0.0005);
  const double p = 620.0 / 860.0;
  EXPECT_NEAR(r.macro_f1, (2 * p / (1 + p)) / 2, 1e-12);
}

TEST(Baseline, OlidTestDistributionAllOffFollowsDefinition) {
  // The published all-OFF figure is 0.2174; the definition gives
  // F1(OFF) = 2q/(1+q), q = 240/860, halved: 0.218182.
  const auto r = baseline_all("OFF", repeat(620, 240), kOffNot);
  const double q = 240.0 / 860.0;
  EXPECT_NEAR(r.macro_f1, (2 * q / (1 + q)) / 2, 1e-12);
  EXPECT_NEAR(r.macro_f1, 0.2182, 0.0001);
}

TEST(Baseline, DegenerateAndErrors) {
  const auto all_not = std::vector<std::string>(10, "NOT");
  EXPECT_DOUBLE_EQ(baseline_all("NOT", all_not, kOffNot).macro_f1, 0.5);
  try {
    baseline_all("NOT", std::vector<std::string>{}, kOffNot);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyGolds);
  }
  EXPECT_THROW(baseline_all("MAYBE", all_not, kOffNot), Error);
}

TEST(Baseline, AllNotIncreasesWithNotFraction) {
  double previous = -1.0;
  for (std::size_t n_not = 1; n_not < 200; ++n_not) {
    std::vector<int> golds(n_not, kNegative);
    golds.insert(golds.end(), 200 - n_not, kPositive);
    const double f = baseline_all(kNegative, golds, kOffNot).macro_f1;
    EXPECT_GT(f, previous);
    previous = f;
  }
}

TEST(Report, Serialization) {
  const std::vector<std::string> golds = {"NOT", "NOT", "NOT", "OFF"};
  const std::vector<std::string> preds = {"NOT", "NOT", "OFF", "OFF"};
  const auto r = metrics(confusion(golds, preds, kOffNot));
  const auto kv = to_key_value(r);
  EXPECT_NE(kv.find("macro_f1=0.7333\n"), std::string::npos) << kv;
  const auto header = tsv_header();
  const auto row = to_tsv_row("model", r);
  EXPECT_EQ(std::count(header.begin(), header.end(), '\t'),
            std::count(row.begin(), row.end(), '\t'));
  EXPECT_EQ(row.rfind("model\t", 0), 0u);
}
