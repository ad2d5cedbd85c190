#include "splitree/simulator.hpp"
#include "splitree/spectrum.hpp"
#include "splitree/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace splitree;

namespace {

const Model& expo() {
  static const Model m = [] {
    ModelParams p;
    p.birth_rate = 1.0;
    p.theta = 1.0;
    p.lifetime = LifetimeModel::exponential(0.5);
    return prepare_model(p, {20.0, 0.01});
  }();
  return m;
}

CoalescentTree random_tree(Rng& rng, int max_n, double t) {
  CoalescentTree tree;
  tree.t = t;
  tree.depths.push_back(t);
  const int n = 1 + static_cast<int>(rng.uniform() * max_n);
  for (int i = 1; i < n; ++i) tree.depths.push_back(rng.uniform(0.0, t));
  return tree;
}

std::vector<MutationRecord> random_mutations(Rng& rng, const CoalescentTree& tree, int max_m) {
  std::vector<MutationRecord> out;
  const int m = static_cast<int>(rng.uniform() * (max_m + 1));
  for (int j = 0; j < m; ++j) {
    const auto i = static_cast<std::int32_t>(rng.uniform() * tree.size());
    out.push_back({i, rng.uniform(0.0, tree.depths[i]), rng.uniform()});
  }
  return out;
}

// Type of individual m: the most recent mutation on its ancestral lineage, as an id.
std::vector<int> types(const CoalescentTree& tree, const std::vector<MutationRecord>& muts, double theta) {
  std::vector<int> type(tree.size(), -1);
  for (std::int64_t m = 0; m < tree.size(); ++m) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < muts.size(); ++j) {
      const auto& mu = muts[j];
      if (mu.mark > theta || mu.branch > m) continue;
      bool blocked = false;
      for (std::int64_t i = mu.branch + 1; i <= m; ++i) blocked = blocked || tree.depths[i] > mu.depth;
      if (!blocked && mu.depth < best) {
        best = mu.depth;
        type[m] = static_cast<int>(j);
      }
    }
  }
  return type;
}

}  // namespace

TEST_CASE("CPP sampling") {
  Rng rng(1);
  const double t = 2.0;
  const int n = 100000;
  Eigen::VectorXd sizes(n);
  std::array<int, 3> above{};
  const std::array<double, 3> s{0.5, 1.0, 1.5};
  std::int64_t draws = 0;
  for (int r = 0; r < n; ++r) {
    const CoalescentTree tree = sample_cpp(expo().W, t, rng);
    REQUIRE(tree.size() >= 1);
    CHECK(tree.depths[0] == t);
    for (std::int64_t i = 1; i < tree.size(); ++i) {
      REQUIRE(tree.depths[i] <= t);
      ++draws;
      for (int j = 0; j < 3; ++j) above[j] += tree.depths[i] > s[j];
    }
    sizes(r) = static_cast<double>(tree.size());
  }
  const auto sum = stats::summarize(sizes);
  CHECK(std::abs(sum.mean - (2.0 * std::exp(1.0) - 1.0)) < 3.0 * sum.se_mean);
  // Stored depths are H conditioned on H <= t: P(H > s | H <= t) = (1/W(s) - 1/W(t)) / (1 - 1/W(t)).
  for (int j = 0; j < 3; ++j) {
    const double q = 1.0 / expo().W(t);
    const double p = (1.0 / expo().W(s[j]) - q) / (1.0 - q);
    const double emp = above[j] / double(draws);
    CHECK(std::abs(emp - p) < 4.0 * std::sqrt(p * (1 - p) / draws));
  }
  CHECK_THROWS(sample_cpp(expo().W, -1.0, rng));
}

TEST_CASE("mutation scattering") {
  Rng rng(2);
  const CoalescentTree tree{3.0, {3.0, 1.0, 2.0, 0.5}};
  const double expected = 2.0 * (3.0 + 1.0 + 2.0 + 0.5);
  double total = 0.0;
  const int reps = 20000;
  std::vector<double> branch_count(4, 0.0);
  for (int r = 0; r < reps; ++r) {
    const auto muts = scatter_mutations(tree, 2.0, rng);
    total += muts.size();
    for (const auto& m : muts) {
      REQUIRE(m.depth > 0.0);
      REQUIRE(m.depth < tree.depths[m.branch]);
      REQUIRE(m.mark >= 0.0);
      REQUIRE(m.mark <= 2.0);
      if (m.mark <= 0.5) branch_count[m.branch] += 1.0;
    }
  }
  CHECK(std::abs(total / reps - expected) < 3.0 * std::sqrt(expected / reps));
  // Thinning to theta' = 0.5: counts per branch proportional to the spans.
  const double span_total = 6.5;
  std::vector<double> probs;
  for (double d : tree.depths) probs.push_back(d / span_total);
  CHECK(stats::chi_square(branch_count, probs).p_value > 0.01);

  const CoalescentTree single{3.0, {3.0}};
  std::vector<double> depths;
  while (depths.size() < 5000) {
    for (const auto& m : scatter_mutations(single, 1.0, rng)) {
      CHECK(m.branch == 0);
      depths.push_back(m.depth);
    }
  }
  CHECK(stats::ks_one_sample(depths, [](double x) { return std::clamp(x / 3.0, 0.0, 1.0); }).p_value > 0.01);
}

TEST_CASE("hand instance of the covering rule") {
  const CoalescentTree tree{3.0, {3.0, 1.0, 2.0}};
  const std::vector<MutationRecord> muts{{1, 0.5, 0.1}};
  for (const auto& s : {spectrum_at_rate(tree, muts, 1.0), lineage_oracle(tree, muts, 1.0)}) {
    CHECK(s.N == 3);
    CHECK(s.clonal == 2);
    CHECK(s.count(1) == 1);
    CHECK(s.counts.size() == 1);
  }
  const auto none = spectrum_at_rate(tree, {}, 1.0);
  CHECK(none.clonal == 3);
  CHECK(none.counts.empty());
  const CoalescentTree one{3.0, {3.0}};
  const auto s = lineage_oracle(one, {{0, 1.0, 0.0}}, 1.0);
  CHECK(s.clonal == 0);
  CHECK(s.count(1) == 1);
  // marks above theta_eval are ignored
  CHECK(spectrum_at_rate(tree, muts, 0.05).clonal == 3);
}

TEST_CASE("sweep equals lineage oracle on random instances") {
  Rng rng(3);
  for (int r = 0; r < 1000; ++r) {
    const CoalescentTree tree = random_tree(rng, 50, 5.0);
    const auto muts = random_mutations(rng, tree, 100);
    for (double th : {0.3, 1.0}) {
      const auto fast = spectrum_at_rate(tree, muts, th);
      REQUIRE(fast == lineage_oracle(tree, muts, th));
      REQUIRE(partition_holds(fast));
    }
  }
}

TEST_CASE("exact EHH equals pair counting") {
  Rng rng(4);
  for (int r = 0; r < 100; ++r) {
    CoalescentTree tree = random_tree(rng, 40, 4.0);
    if (tree.size() < 2) tree.depths.push_back(1.0);
    const auto muts = random_mutations(rng, tree, 30);
    const auto type = types(tree, muts, 0.7);
    std::int64_t same = 0;
    for (std::size_t i = 0; i < type.size(); ++i)
      for (std::size_t j = 0; j < type.size(); ++j) same += i != j && type[i] == type[j];
    const double n = static_cast<double>(tree.size());
    const auto g = ehh_exact(spectrum_at_rate(tree, muts, 0.7));
    REQUIRE(g.has_value());
    CHECK(*g == doctest::Approx(same / (n * (n - 1))).epsilon(1e-12));
  }
  const CoalescentTree tree{3.0, {3.0, 1.0, 2.0}};
  CHECK(ehh_exact(spectrum_at_rate(tree, {}, 0.0)).value() == 1.0);
  const std::vector<MutationRecord> singles{{0, 2.5, 0.0}, {1, 0.5, 0.0}, {2, 1.5, 0.0}};
  CHECK(ehh_exact(spectrum_at_rate(tree, singles, 1.0)).value() == 0.0);
  CHECK_FALSE(ehh_exact(spectrum_at_rate({3.0, {3.0}}, {}, 1.0)).has_value());
}

TEST_CASE("monotone refinement across theta") {
  Rng rng(5);
  for (int r = 0; r < 200; ++r) {
    const CoalescentTree tree = random_tree(rng, 40, 4.0);
    const auto muts = random_mutations(rng, tree, 60);
    const auto coarse = types(tree, muts, 0.4);
    const auto fine = types(tree, muts, 0.8);
    // every fine family lies inside one coarse family
    std::map<int, std::set<int>> parents;
    for (std::size_t i = 0; i < fine.size(); ++i) parents[fine[i]].insert(coarse[i]);
    for (const auto& [id, set] : parents) CHECK(set.size() == 1);
    const auto s1 = spectrum_at_rate(tree, muts, 0.4), s2 = spectrum_at_rate(tree, muts, 0.8);
    CHECK(s2.clonal <= s1.clonal);
    if (tree.size() >= 2) CHECK(*ehh_exact(s2) <= *ehh_exact(s1) + 1e-15);
  }
}

TEST_CASE("geometric and clonal laws at moderate scale") {
  ModelParams p = expo().params;
  const double t = 3.0;
  Rng rng(6);
  const int reps = 20000;
  std::vector<double> n_hist(60, 0.0), z_hist(60, 0.0);
  for (int r = 0; r < reps; ++r) {
    const auto tree = sample_cpp(expo().W, t, rng);
    const auto s = spectrum_at_rate(tree, scatter_mutations(tree, p.theta, rng), p.theta);
    n_hist[std::min<std::int64_t>(tree.size(), 59)] += 1;
    z_hist[std::min<std::int64_t>(s.clonal, 59)] += 1;
  }
  std::vector<double> pn(60, 0.0), pz(60, 0.0);
  const double q = 1.0 / expo().W(t);
  double tail_n = 1.0, tail_z = 1.0;
  for (int k = 1; k < 59; ++k) {
    pn[k] = q * std::pow(1 - q, k - 1);
    tail_n -= pn[k];
  }
  pn[59] = tail_n;
  pz[0] = 1.0 - clonal_positive_prob(expo(), t);
  tail_z -= pz[0];
  for (int k = 1; k < 59; ++k) {
    pz[k] = clonal_pmf(expo(), t, k);
    tail_z -= pz[k];
  }
  pz[59] = tail_z;
  CHECK(stats::chi_square(n_hist, pn).p_value > 0.01);
  CHECK(stats::chi_square(z_hist, pz).p_value > 0.01);
}
