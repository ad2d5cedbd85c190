#ifndef SPLITREE_FORWARD_HPP
#define SPLITREE_FORWARD_HPP

#include "splitree/rng.hpp"
#include "splitree/scalefn.hpp"
#include "splitree/simulator.hpp"

#include <cstdint>
#include <vector>

namespace splitree {

struct ForwardOptions {
  double horizon = 0.0;              // T
  std::vector<double> checkpoints;   // increasing times in [0, T]
  std::vector<double> theta_evals;   // spectra recorded at every checkpoint
  double theta_max = 0.0;            // marks uniform on [0, theta_max]
  std::int64_t population_cap = 5'000'000;  // individuals ever born before the run is truncated
  std::int64_t alive_cap = 0;        // > 0: stop once this many are alive (survival studies)
  /// Exponential and infinite lifetimes: jump from the last checkpoint to T with
  /// the exact law of a birth-death process instead of simulating every birth.
  bool markov_continuation = true;
};

struct ForwardCheckpoint {
  double time = 0.0;
  std::int64_t N = 0;
  std::vector<SpectrumResult> spectra;  // one per theta_eval
};

struct ForwardRun {
  double horizon = 0.0;
  std::vector<ForwardCheckpoint> checkpoints;
  std::int64_t terminal_N = 0;
  bool truncated = false;          // population_cap hit; checkpoints after the cut are invalid
  bool reached_alive_cap = false;  // stopped early with alive_cap individuals alive
  std::int64_t born = 0;
};

/// Event-driven splitting tree from one ancestor born at time 0.
ForwardRun simulate_forward(const ModelParams& params, const ForwardOptions& options, Rng& rng);

/// Reruns until N > 0 at the first checkpoint. Throws NumericError after max_attempts.
ForwardRun simulate_forward_surviving(const ModelParams& params, const ForwardOptions& options,
                                      Rng& rng, int max_attempts = 100000);

/// E-hat = psi'(alpha) e^{-alpha T} N_T; zero on extinct runs.
double estimate_E(const ForwardRun& run, double alpha, double psi_prime_alpha);

}  // namespace splitree

#endif  // SPLITREE_FORWARD_HPP
