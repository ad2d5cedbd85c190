#ifndef SPLITREE_SIMULATOR_HPP
#define SPLITREE_SIMULATOR_HPP

#include "splitree/rng.hpp"
#include "splitree/scalefn.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace splitree {

/// Genealogy of the survivors at time t. depths[0] = t is the ancestral
/// branch; depths[i], i >= 1, are the coalescence depths H_i <= t.
struct CoalescentTree {
  double t = 0.0;
  std::vector<double> depths;

  std::int64_t size() const { return static_cast<std::int64_t>(depths.size()); }
};

/// Draws H with P(H > s) = 1/W(s) until the first draw exceeds t.
CoalescentTree sample_cpp(const ScaleTable& W, double t, Rng& rng);

struct MutationRecord {
  std::int32_t branch = 0;
  double depth = 0.0;
  double mark = 0.0;
};

/// Poisson(theta_max * span) mutations per branch with uniform depths and marks.
std::vector<MutationRecord> scatter_mutations(const CoalescentTree& tree, double theta_max, Rng& rng);

struct SpectrumResult {
  double theta_eval = 0.0;
  std::map<std::int64_t, std::int64_t> counts;  // k -> A(k, t)
  std::int64_t clonal = 0;                      // Z_0(t)
  std::int64_t N = 0;

  std::int64_t count(std::int64_t k) const {
    const auto it = counts.find(k);
    return it == counts.end() ? 0 : it->second;
  }
  bool operator==(const SpectrumResult&) const = default;
};

/// Families of the mutations with mark <= theta_eval. Each individual takes the
/// shallowest mutation covering it; uncovered individuals form the clonal family.
SpectrumResult spectrum_at_rate(const CoalescentTree& tree,
                                const std::vector<MutationRecord>& mutations, double theta_eval);

/// Brute-force reference for spectrum_at_rate: walks each individual's lineage.
SpectrumResult lineage_oracle(const CoalescentTree& tree,
                              const std::vector<MutationRecord>& mutations, double theta_eval);

/// Probability that two distinct uniformly chosen individuals share a type; nullopt if N < 2.
std::optional<double> ehh_exact(const SpectrumResult& spectrum);

/// Partition identity N = Z_0 + sum_k k A(k).
bool partition_holds(const SpectrumResult& spectrum);

}  // namespace splitree

#endif  // SPLITREE_SIMULATOR_HPP
