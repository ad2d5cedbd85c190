#include "splitree/simulator.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace splitree {

CoalescentTree sample_cpp(const ScaleTable& W, double t, Rng& rng) {
  if (!(t >= 0.0) || t > W.t_max()) {
    throw std::invalid_argument("sample_cpp needs 0 <= t <= t_max of the scale table");
  }
  CoalescentTree tree;
  tree.t = t;
  tree.depths.push_back(t);
  const double stop = 1.0 / W(t);
  while (true) {
    const double u = rng.uniform();
    if (u < stop) break;  // 1/u > W(t): the draw lands beyond t
    const auto depth = W.inverse(1.0 / u);
    if (!depth || *depth > t) break;
    tree.depths.push_back(*depth);
  }
  return tree;
}

std::vector<MutationRecord> scatter_mutations(const CoalescentTree& tree, double theta_max, Rng& rng) {
  if (!(theta_max > 0.0)) throw std::invalid_argument("scatter_mutations needs theta_max > 0");
  std::vector<MutationRecord> out;
  for (std::size_t i = 0; i < tree.depths.size(); ++i) {
    const double span = tree.depths[i];
    const std::int64_t count = rng.poisson(theta_max * span);
    for (std::int64_t j = 0; j < count; ++j) {
      const double depth = rng.uniform(0.0, span);
      out.push_back({static_cast<std::int32_t>(i), depth, rng.uniform(0.0, theta_max)});
    }
  }
  return out;
}

namespace {

// Range-maximum table over depths[1..N-1]; answers "first j > i with H_j >= a".
class NextDeeper {
 public:
  explicit NextDeeper(const std::vector<double>& depths) : n_(depths.size()) {
    levels_.push_back(depths);
    for (std::size_t width = 1; 2 * width <= n_; width *= 2) {
      const auto& prev = levels_.back();
      std::vector<double> next(n_ - 2 * width + 1);
      for (std::size_t j = 0; j < next.size(); ++j) next[j] = std::max(prev[j], prev[j + width]);
      levels_.push_back(std::move(next));
    }
  }

  std::size_t after(std::size_t i, double a) const {
    std::size_t pos = i + 1;
    for (std::size_t p = levels_.size(); p-- > 0;) {
      const std::size_t width = std::size_t{1} << p;
      if (pos + width <= n_ && levels_[p][pos] < a) pos += width;
    }
    return pos;
  }

 private:
  std::size_t n_;
  std::vector<std::vector<double>> levels_;
};

std::vector<MutationRecord> kept_sorted(const std::vector<MutationRecord>& mutations, double theta_eval) {
  std::vector<MutationRecord> kept;
  for (const auto& m : mutations) {
    if (m.mark <= theta_eval) kept.push_back(m);
  }
  std::sort(kept.begin(), kept.end(), [](const MutationRecord& x, const MutationRecord& y) {
    return std::tie(x.depth, x.branch) < std::tie(y.depth, y.branch);
  });
  return kept;
}

}  // namespace

SpectrumResult spectrum_at_rate(const CoalescentTree& tree,
                                const std::vector<MutationRecord>& mutations, double theta_eval) {
  const std::size_t n = tree.depths.size();
  SpectrumResult result;
  result.theta_eval = theta_eval;
  result.N = static_cast<std::int64_t>(n);
  const auto kept = kept_sorted(mutations, theta_eval);
  if (kept.empty()) {
    result.clonal = result.N;
    return result;
  }
  const NextDeeper deeper(tree.depths);
  // next_free[x]: smallest unclaimed individual >= x (union-find with path halving).
  std::vector<std::size_t> next_free(n + 1);
  std::iota(next_free.begin(), next_free.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (next_free[x] != x) {
      next_free[x] = next_free[next_free[x]];
      x = next_free[x];
    }
    return x;
  };
  std::int64_t claimed = 0;
  for (const auto& m : kept) {
    const auto i = static_cast<std::size_t>(m.branch);
    const std::size_t end = deeper.after(i, m.depth);
    std::int64_t size = 0;
    for (std::size_t x = find(i); x < end; x = find(x)) {
      next_free[x] = x + 1;
      ++size;
    }
    if (size > 0) ++result.counts[size];
    claimed += size;
  }
  result.clonal = result.N - claimed;
  return result;
}

SpectrumResult lineage_oracle(const CoalescentTree& tree,
                              const std::vector<MutationRecord>& mutations, double theta_eval) {
  const std::size_t n = tree.depths.size();
  SpectrumResult result;
  result.theta_eval = theta_eval;
  result.N = static_cast<std::int64_t>(n);
  const auto kept = kept_sorted(mutations, theta_eval);
  std::vector<std::int64_t> family_size(kept.size(), 0);
  for (std::size_t m = 0; m < n; ++m) {
    bool typed = false;
    for (std::size_t idx = 0; idx < kept.size() && !typed; ++idx) {
      const double a = kept[idx].depth;
      // Ancestor of m at depth a: the last branch j <= m with H_j > a (H_0 = t).
      std::size_t ancestor = 0;
      for (std::size_t j = m + 1; j-- > 1;) {
        if (tree.depths[j] > a) {
          ancestor = j;
          break;
        }
      }
      if (static_cast<std::size_t>(kept[idx].branch) == ancestor) {
        ++family_size[idx];
        typed = true;
      }
    }
    if (!typed) ++result.clonal;
  }
  for (std::int64_t size : family_size) {
    if (size > 0) ++result.counts[size];
  }
  return result;
}

std::optional<double> ehh_exact(const SpectrumResult& spectrum) {
  if (spectrum.N < 2) return std::nullopt;
  double same = static_cast<double>(spectrum.clonal) * (spectrum.clonal - 1);
  for (const auto& [k, count] : spectrum.counts) same += static_cast<double>(count) * k * (k - 1);
  return same / (static_cast<double>(spectrum.N) * (spectrum.N - 1));
}

bool partition_holds(const SpectrumResult& spectrum) {
  std::int64_t total = spectrum.clonal;
  for (const auto& [k, count] : spectrum.counts) total += k * count;
  return total == spectrum.N;
}

}  // namespace splitree
