#include <doctest.h>

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>

#include "convxai/dtw.hpp"
#include "convxai/error.hpp"
#include "convxai/profile.hpp"
#include "convxai/random.hpp"
#include "convxai/style_model.hpp"
#include "convxai/synthetic.hpp"
#include "../support.hpp"

using namespace convxai;

namespace {

std::vector<AspectLabel> random_labels(Rng& rng, std::size_t max_len, std::size_t alphabet = kNumAspects) {
  std::vector<AspectLabel> out(1 + rng.below(max_len));
  for (auto& l : out) l = aspect_at(rng.below(alphabet));
  return out;
}

// Minimum over every monotone path, by explicit enumeration.
double exhaustive_dtw(const std::vector<AspectLabel>& a, const std::vector<AspectLabel>& b) {
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double acc) {
    acc += a[i] == b[j] ? 0.0 : 1.0;
    if (i + 1 == a.size() && j + 1 == b.size()) {
      best = std::min(best, acc);
      return;
    }
    if (i + 1 < a.size()) walk(i + 1, j, acc);
    if (j + 1 < b.size()) walk(i, j + 1, acc);
    if (i + 1 < a.size() && j + 1 < b.size()) walk(i + 1, j + 1, acc);
  };
  walk(0, 0, 0.0);
  return best;
}

// Exhaustive weighted k-medoids optimum.
double best_medoid_cost(const std::vector<std::vector<double>>& d, const std::vector<double>& w, std::size_t k) {
  const std::size_t n = d.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<long>(k), true);
  std::sort(pick.begin(), pick.end());
  do {
    double cost = 0;
    for (std::size_t j = 0; j < n; ++j) {
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t m = 0; m < n; ++m) {
        if (pick[m]) nearest = std::min(nearest, d[j][m]);
      }
      cost += w[j] * nearest;
    }
    best = std::min(best, cost);
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

}  // namespace

TEST_CASE("dtw distance equals exhaustive path enumeration") {
  Rng rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_labels(rng, 5, 3);
    const auto b = random_labels(rng, 5, 3);
    const double oracle = exhaustive_dtw(a, b);
    CHECK(dtw_distance(a, b) == oracle);
    CHECK(dtw_align(a, b).distance == oracle);
  }
}

TEST_CASE("dtw path is monotone, complete and realizes the distance") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_labels(rng, 9);
    const auto b = random_labels(rng, 9);
    const auto r = dtw_align(a, b);
    REQUIRE(!r.path.empty());
    CHECK(r.path.front() == std::pair<std::size_t, std::size_t>{0, 0});
    CHECK(r.path.back() == std::pair<std::size_t, std::size_t>{a.size() - 1, b.size() - 1});
    double cost = 0;
    for (std::size_t s = 0; s < r.path.size(); ++s) {
      const auto [i, j] = r.path[s];
      cost += a[i] == b[j] ? 0 : 1;
      if (s) {
        const auto [pi, pj] = r.path[s - 1];
        CHECK(i - pi <= 1);
        CHECK(j - pj <= 1);
        CHECK(i + j > pi + pj);
      }
    }
    CHECK(cost == r.distance);
  }
}

TEST_CASE("dtw is symmetric and zero on identical sequences") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_labels(rng, 8);
    const auto b = random_labels(rng, 8);
    CHECK(dtw_distance(a, b) == dtw_distance(b, a));
    CHECK(dtw_distance(a, a) == 0.0);
  }
}

TEST_CASE("dtw backtrack prefers the diagonal on ties") {
  using L = AspectLabel;
  const std::vector<L> a = {L::Background, L::Method};
  const std::vector<L> b = {L::Background, L::Method};
  const auto r = dtw_align(a, b);
  CHECK(r.path.size() == 2);
  CHECK_THROWS_AS(dtw_distance(std::vector<L>{}, b), InvalidInput);
}

TEST_CASE("resampling maps output position j to input floor(j*n/L)") {
  using L = AspectLabel;
  const std::vector<L> in = {L::Background, L::Purpose, L::Method, L::Finding};
  const auto out = resample_labels(in, 12);
  REQUIRE(out.size() == 12);
  for (std::size_t j = 0; j < 12; ++j) CHECK(out[j] == in[j * in.size() / 12]);
  const auto shrink = resample_labels(std::vector<L>(20, L::Method), 12);
  CHECK(shrink == std::vector<L>(12, L::Method));
}

TEST_CASE("nearest-rank percentile matches the integer rank formula") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(1 + rng.below(50));
    for (auto& x : v) x = rng.uniform();
    std::sort(v.begin(), v.end());
    for (int p : {5, 20, 40, 60, 80, 95, 100}) {
      std::size_t rank = 0;
      while (rank * 100 < static_cast<std::size_t>(p) * v.size()) ++rank;  // smallest rank with rank >= p*N/100
      rank = std::max<std::size_t>(rank, 1);
      CHECK(nearest_rank_percentile(v, p) == v[rank - 1]);
    }
  }
  CHECK_THROWS_AS(nearest_rank_percentile(std::vector<double>{}, 50), InvalidInput);
}

TEST_CASE("k-medoids reaches the exhaustive optimum on small instances") {
  Rng rng(19);
  int optimal = 0, trials = 60;
  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t n = 3 + rng.below(6);
    const std::size_t k = 1 + rng.below(std::min<std::size_t>(n, 4));
    std::vector<std::vector<AspectLabel>> seqs(n);
    for (auto& s : seqs) s = random_labels(rng, 6);
    std::vector<std::vector<double>> d(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = dtw_distance(seqs[i], seqs[j]);
    std::vector<double> w(n);
    for (auto& x : w) x = static_cast<double>(1 + rng.below(4));
    const auto result = k_medoids(d, w, k, 17);
    CHECK(result.medoids.size() == k);
    CHECK(std::is_sorted(result.medoids.begin(), result.medoids.end()));
    const double oracle = best_medoid_cost(d, w, k);
    CHECK(result.cost >= oracle - 1e-9);
    optimal += std::abs(result.cost - oracle) < 1e-9;
    // Every medoid keeps itself.
    for (std::size_t p = 0; p < k; ++p) CHECK(result.assignment[result.medoids[p]] == p);
  }
  CHECK(optimal == trials);
}

TEST_CASE("extract_patterns is deterministic and invariant to record order") {
  const auto& corpus = testing::demo_corpus();
  auto records = corpus.records();
  const auto base = extract_patterns(corpus, "ACL", 5, 12, 17);
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    rng.shuffle(records);
    const auto shuffled = extract_patterns(Corpus(records), "ACL", 5, 12, 17);
    REQUIRE(shuffled.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(shuffled[i].sequence == base[i].sequence);
      CHECK(shuffled[i].support == base[i].support);
    }
  }
  std::size_t support = 0;
  for (const auto& p : base) {
    CHECK(p.sequence.size() == 12);
    CHECK(p.support > 0);
    support += p.support;
  }
  CHECK(support == corpus.filter("ACL").size());
}

TEST_CASE("extract_patterns returns one pattern per distinct sequence when there are fewer than k") {
  using L = AspectLabel;
  std::vector<CorpusRecord> records;
  for (int i = 0; i < 6; ++i) {
    records.push_back({"X", 2020, "a" + std::to_string(i),
                       {{"One.", L::Background}, {"Two.", i % 2 ? L::Method : L::Finding}}});
  }
  const auto patterns = extract_patterns(Corpus(records), "X", 5, 12);
  CHECK(patterns.size() == 2);
  CHECK(patterns[0].support == 3);
  CHECK_THROWS_AS(extract_patterns(Corpus(records), "X", 7, 12), DegenerateInput);
}

TEST_CASE("pattern display form reports run percentages") {
  using L = AspectLabel;
  StructurePattern p{{L::Background, L::Background, L::Purpose, L::Method, L::Finding, L::Finding}, 1};
  CHECK(p.display_form() == "background (33.3%) -> purpose (16.7%) -> method (16.7%) -> finding (33.3%)");
}

TEST_CASE("profile quantization splits training sentences into near-equal buckets") {
  const auto corpus = separable_corpus(500, 3);
  const auto lm = train_style_lm(corpus, 2, 0.1);
  const auto profile = build_profile(corpus, "SYN", [&](std::string_view s) { return sentence_perplexity(lm, s); });
  std::array<int, 6> buckets{};
  for (const auto& r : corpus.records())
    for (const auto& s : r.sentences) ++buckets[quantize_quality(sentence_perplexity(lm, s.text), profile.quality_boundaries)];
  for (int q = 1; q <= 5; ++q) CHECK(std::abs(buckets[q] - 100) <= 1);
  double total = 0;
  for (double share : profile.label_distribution) total += share;
  CHECK(total == doctest::Approx(1.0));
  CHECK(profile.length_stats.p5 <= profile.length_stats.mean);
  CHECK(profile.length_stats.mean <= profile.length_stats.p95);
}

TEST_CASE("profile errors: too few sentences, bad perplexity, degenerate boundaries") {
  using L = AspectLabel;
  Corpus tiny({{"X", 2020, "a", {{"One.", L::Background}, {"Two.", L::Method}}}});
  CHECK_THROWS_AS(build_profile(tiny, "X", [](std::string_view) { return 2.0; }), DegenerateInput);
  const auto corpus = separable_corpus(50, 1, "X");
  CHECK_THROWS_AS(build_profile(corpus, "X", [](std::string_view) { return 0.0; }), InvalidInput);
  CHECK_THROWS_AS(build_profile(corpus, "X", [](std::string_view) { return 3.0; }), DegenerateInput);
}

TEST_CASE("profile JSON round trips and rejects other versions") {
  const auto& profile = testing::demo_bundle().conference("CHI").profile;
  const auto j = to_json(profile);
  const auto back = profile_from_json(j);
  CHECK(to_json(back) == j);
  auto wrong = j;
  wrong["format_version"] = 99;
  CHECK_THROWS_AS(profile_from_json(wrong), ArtifactError);
}
