#include "doctest.h"

#include <cstdio>
#include <random>

#include "headliner/metrics.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace headliner;

namespace {

std::vector<std::string> words(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::string> random_words(std::mt19937_64& rng, std::size_t max_len) {
  static const std::vector<std::string> pool{"a", "B", "c", "d", "E", "f"};
  std::uniform_int_distribution<std::size_t> len(0, max_len), pick(0, pool.size() - 1);
  std::vector<std::string> out(len(rng));
  for (auto& w : out) w = pool[pick(rng)];
  return out;
}

std::vector<std::string> lower(std::vector<std::string> xs) {
  for (auto& x : xs) {
    for (char& c : x) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return xs;
}

}  // namespace

TEST_CASE("token scores treat KEEP as the positive class") {
  const std::vector<int> gold{1, 1, 0, 1, 0};
  const std::vector<int> pred{1, 0, 1, 1, 0};
  const Prf s = token_prf(pred, gold);
  CHECK(s.precision == doctest::Approx(2.0 / 3.0));
  CHECK(s.recall == doctest::Approx(2.0 / 3.0));
  CHECK(s.f1 == doctest::Approx(2.0 / 3.0));

  const std::vector<int> none{0, 0, 0, 0, 0};
  const Prf empty_pred = token_prf(none, gold);
  CHECK(empty_pred.precision == 0.0);
  CHECK(empty_pred.recall == 0.0);
  CHECK(empty_pred.f1 == 0.0);
  const Prf both_empty = token_prf(none, none);
  CHECK(both_empty.precision == 1.0);
  CHECK(both_empty.recall == 1.0);
  CHECK(both_empty.f1 == 1.0);
  CHECK_THROWS(token_prf(std::vector<int>{1}, gold));
}

TEST_CASE("rouge-2 worked example") {
  const Prf r = rouge_n(words("the cat sat down"), words("the cat sat on mats"), 2);
  CHECK(r.precision == doctest::Approx(2.0 / 3.0));
  CHECK(r.recall == doctest::Approx(2.0 / 4.0));
  CHECK(r.f1 == doctest::Approx(4.0 / 7.0));
}

TEST_CASE("rouge lowercases and clips repeated n-grams") {
  const Prf r = rouge_n(words("The the THE"), words("the cat"), 1);
  CHECK(r.precision == doctest::Approx(1.0 / 3.0));
  CHECK(r.recall == doctest::Approx(1.0 / 2.0));
  const Prf l = rouge_l(words("Police killed the gunman"), words("police kill the gunman"));
  CHECK(l.precision == doctest::Approx(3.0 / 4.0));
  CHECK(l.recall == doctest::Approx(3.0 / 4.0));
  CHECK(rouge_n({"a"}, {"a"}, 2).f1 == 0.0);
}

TEST_CASE("rouge agrees with independent counting on random pairs") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    const auto cand = random_words(rng, 8);
    const auto ref = random_words(rng, 8);
    const auto lc = lower(cand), lr = lower(ref);
    for (int n : {1, 2}) {
      const double hits = oracle::ngram_overlap(lc, lr, n);
      const double ct = static_cast<double>(oracle::ngram_total(cand.size(), n));
      const double rt = static_cast<double>(oracle::ngram_total(ref.size(), n));
      const Prf r = rouge_n(cand, ref, n);
      const double p = ct == 0 ? 0.0 : hits / ct;
      const double rc = rt == 0 ? 0.0 : hits / rt;
      CHECK(r.precision == doctest::Approx(p).epsilon(1e-12));
      CHECK(r.recall == doctest::Approx(rc).epsilon(1e-12));
      CHECK(r.f1 == doctest::Approx(oracle::f1(p, rc)).epsilon(1e-12));
    }
    const double l = static_cast<double>(oracle::lcs(lc, lr));
    const Prf r = rouge_l(cand, ref);
    const double p = cand.empty() ? 0.0 : l / static_cast<double>(cand.size());
    const double rc = ref.empty() ? 0.0 : l / static_cast<double>(ref.size());
    CHECK(r.precision == doctest::Approx(p).epsilon(1e-12));
    CHECK(r.recall == doctest::Approx(rc).epsilon(1e-12));
    CHECK(r.f1 == doctest::Approx(oracle::f1(p, rc)).epsilon(1e-12));
  }
}

TEST_CASE("recall never drops when the candidate gains a reference word") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    auto cand = random_words(rng, 6);
    const auto ref = random_words(rng, 6);
    if (ref.empty()) continue;
    const double before = rouge_n(cand, ref, 1).recall;
    const double before_l = rouge_l(cand, ref).recall;
    cand.push_back(ref.back());
    CHECK(rouge_n(cand, ref, 1).recall >= before);
    CHECK(rouge_l(cand, ref).recall >= before_l);
  }
  std::vector<int> gold{1, 0, 1, 1}, pred{0, 0, 1, 0};
  const double r0 = token_prf(pred, gold).recall;
  pred[0] = 1;
  CHECK(token_prf(pred, gold).recall > r0);
}

TEST_CASE("mean and population standard deviation with one-decimal formatting") {
  const auto m = mean_stdev(std::vector<double>{8.0, 10.0});
  CHECK(m.mean == 9.0);
  CHECK(m.stdev == 1.0);
  CHECK(format_mean_stdev(m) == "9.0 ± 1.0");
  CHECK(format_mean_stdev({9.14, 3.36}) == "9.1 ± 3.4");
  CHECK(format_mean_stdev({0.4512, 0.1}, 100) == "45.1 ± 10.0");
  const auto len = length_stats(std::vector<std::size_t>{2, 4, 4, 4, 5, 5, 7, 9});
  CHECK(len.mean == 5.0);
  CHECK(len.stdev == 2.0);
  CHECK(mean_stdev(std::vector<double>{3.0}).stdev == 0.0);
}

TEST_CASE("json and table renderings carry the same numbers") {
  std::vector<EvalItem> items;
  items.push_back({"x", std::vector<int>{1, 0, 1}, std::vector<int>{1, 1, 0}, {"a", "c"}, {"a", "b"}});
  items.push_back({"y", std::vector<int>{0, 1}, std::vector<int>{0, 1}, {"d"}, {"d"}});
  const EvalReport report = evaluate(items);
  CHECK(report.count == 2);
  CHECK(report.f1.mean == doctest::Approx((0.5 + 1.0) / 2));
  CHECK(report.micro.precision == doctest::Approx(2.0 / 3.0));

  const auto j = nlohmann::json::parse(report.to_json());
  const std::string table = report.to_table("demo");
  auto pct = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", 100 * v);
    return std::string(buf);
  };
  CHECK(j["f1"]["mean"].get<double>() == report.f1.mean);
  CHECK(table.find(pct(j["f1"]["mean"].get<double>()) + " ± " + pct(j["f1"]["stdev"].get<double>())) !=
        std::string::npos);
  CHECK(table.find(pct(j["micro"]["precision"].get<double>())) != std::string::npos);
  CHECK(table.find(pct(j["rouge2"]["f1"].get<double>())) != std::string::npos);
  CHECK(table.find(pct(j["rougeL"]["recall"].get<double>())) != std::string::npos);

  std::vector<EvalItem> titles{{"t", std::nullopt, std::nullopt, {"a"}, {"a", "b"}}};
  const auto title_report = evaluate(titles);
  CHECK_FALSE(title_report.has_masks);
  CHECK_FALSE(nlohmann::json::parse(title_report.to_json()).contains("f1"));
  CHECK_THROWS(evaluate({}));
}
