#include "splitree/forward.hpp"

#include "splitree/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <stdexcept>

namespace splitree {

namespace {

struct Individual {
  double birth;
  double death;
  std::int32_t parent;
  std::uint32_t first_mutation;
  std::uint32_t end_mutation;
};

struct Event {
  double time;
  std::int32_t who;
  bool operator>(const Event& other) const {
    return time > other.time || (time == other.time && who > other.who);
  }
};

// Latest mutation of `x` strictly before `time` with mark <= theta, as type id + 1; 0 if none.
std::uint32_t latest_mutation(const Individual& x, const std::vector<double>& times,
                              const std::vector<double>& marks, double time, double theta,
                              bool inclusive) {
  std::uint32_t found = 0;
  for (std::uint32_t m = x.first_mutation; m < x.end_mutation; ++m) {
    const bool before = inclusive ? times[m] <= time : times[m] < time;
    if (!before) break;
    if (marks[m] <= theta) found = m + 1;
  }
  return found;
}

SpectrumResult spectrum_of(const std::vector<Individual>& people, const std::vector<double>& times,
                           const std::vector<double>& marks, double s, double theta) {
  SpectrumResult out;
  out.theta_eval = theta;
  std::vector<std::uint32_t> birth_type(people.size(), 0);
  std::vector<std::int64_t> family(times.size() + 1, 0);
  for (std::size_t x = 0; x < people.size(); ++x) {
    const Individual& me = people[x];
    if (me.birth > s) continue;
    if (me.parent >= 0) {
      const Individual& parent = people[me.parent];
      const std::uint32_t inherited = latest_mutation(parent, times, marks, me.birth, theta, false);
      birth_type[x] = inherited ? inherited : birth_type[me.parent];
    }
    if (me.death <= s) continue;
    const std::uint32_t own = latest_mutation(me, times, marks, s, theta, true);
    ++family[own ? own : birth_type[x]];
    ++out.N;
  }
  out.clonal = family[0];
  for (std::size_t id = 1; id < family.size(); ++id) {
    if (family[id] > 0) ++out.counts[family[id]];
  }
  return out;
}

// Population at time u after starting from n individuals, exact for Markovian lifetimes.
std::int64_t markov_jump(const ModelParams& params, std::int64_t n, double u, Rng& rng) {
  if (n == 0 || u <= 0.0) return n;
  const double b = params.birth_rate;
  const double d = params.lifetime.death_rate();
  if (d == 0.0) return n + rng.negative_binomial(n, std::exp(-b * u));
  const double alpha = b - d;
  const double e = std::exp(alpha * u);
  const double extinct = d * (e - 1.0) / (b * e - d);
  const double eta = b * (e - 1.0) / (b * e - d);
  const std::int64_t survivors = rng.binomial(n, 1.0 - extinct);
  return survivors + rng.negative_binomial(survivors, 1.0 - eta);
}

}  // namespace

ForwardRun simulate_forward(const ModelParams& params, const ForwardOptions& options, Rng& rng) {
  const double T = options.horizon;
  if (!(T > 0.0)) throw std::invalid_argument("simulate_forward needs a horizon T > 0");
  if (!std::is_sorted(options.checkpoints.begin(), options.checkpoints.end()) ||
      (!options.checkpoints.empty() &&
       (options.checkpoints.front() < 0.0 || options.checkpoints.back() > T))) {
    throw std::invalid_argument("checkpoints must be increasing within [0, T]");
  }
  for (double theta : options.theta_evals) {
    if (theta > options.theta_max) throw std::invalid_argument("theta_eval exceeds theta_max");
  }
  const bool mutate = !options.theta_evals.empty() && options.theta_max > 0.0;
  const double last_check = options.checkpoints.empty() ? 0.0 : options.checkpoints.back();
  const bool jump = options.markov_continuation && params.lifetime.is_markovian() &&
                    options.alive_cap == 0 && !options.checkpoints.empty() && last_check < T;
  const double sim_end = jump ? last_check : T;
  const double mutation_end = last_check;

  std::vector<Individual> people;
  std::vector<double> times, marks;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> births;
  std::priority_queue<double, std::vector<double>, std::greater<>> deaths;
  ForwardRun run;
  run.horizon = T;

  auto create = [&](double birth, std::int32_t parent) {
    const double death = birth + params.lifetime.sample(rng);
    const auto first = static_cast<std::uint32_t>(times.size());
    if (mutate) {
      const double span = std::min(death, mutation_end) - birth;
      if (span > 0.0) {
        const std::int64_t count = rng.poisson(options.theta_max * span);
        std::vector<double> local(count);
        for (auto& v : local) v = rng.uniform(birth, birth + span);
        std::sort(local.begin(), local.end());
        for (double v : local) {
          times.push_back(v);
          marks.push_back(rng.uniform(0.0, options.theta_max));
        }
      }
    }
    const auto id = static_cast<std::int32_t>(people.size());
    people.push_back({birth, death, parent, first, static_cast<std::uint32_t>(times.size())});
    const double next = birth + rng.exponential(params.birth_rate);
    if (next < death && next <= sim_end) births.push({next, id});
    if (std::isfinite(death)) deaths.push(death);
  };

  create(0.0, -1);
  std::int64_t died = 0;
  while (!births.empty()) {
    const Event event = births.top();
    births.pop();
    if (options.alive_cap > 0) {
      while (!deaths.empty() && deaths.top() <= event.time) {
        deaths.pop();
        ++died;
      }
      if (static_cast<std::int64_t>(people.size()) - died >= options.alive_cap) {
        run.reached_alive_cap = true;
        break;
      }
    }
    if (static_cast<std::int64_t>(people.size()) >= options.population_cap) {
      run.truncated = true;
      break;
    }
    create(event.time, event.who);
    const Individual& parent = people[event.who];
    const double next = event.time + rng.exponential(params.birth_rate);
    if (next < parent.death && next <= sim_end) births.push({next, event.who});
  }
  run.born = static_cast<std::int64_t>(people.size());

  auto alive_at = [&](double s) {
    std::int64_t n = 0;
    for (const auto& x : people) n += (x.birth <= s && x.death > s);
    return n;
  };
  for (double s : options.checkpoints) {
    ForwardCheckpoint cp;
    cp.time = s;
    cp.N = alive_at(s);
    for (double theta : options.theta_evals) cp.spectra.push_back(spectrum_of(people, times, marks, s, theta));
    if (options.theta_evals.empty()) cp.spectra.clear();
    run.checkpoints.push_back(std::move(cp));
  }
  if (run.reached_alive_cap) {
    run.terminal_N = options.alive_cap;
  } else if (jump) {
    run.terminal_N = markov_jump(params, run.checkpoints.back().N, T - sim_end, rng);
  } else {
    run.terminal_N = alive_at(T);
  }
  return run;
}

ForwardRun simulate_forward_surviving(const ModelParams& params, const ForwardOptions& options,
                                      Rng& rng, int max_attempts) {
  if (options.checkpoints.empty()) throw std::invalid_argument("conditioning needs a checkpoint");
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    ForwardRun run = simulate_forward(params, options, rng);
    if (run.checkpoints.front().N > 0) return run;
  }
  throw NumericError("no surviving run after " + std::to_string(max_attempts) + " attempts");
}

double estimate_E(const ForwardRun& run, double alpha, double psi_prime_alpha) {
  return psi_prime_alpha * std::exp(-alpha * run.horizon) * static_cast<double>(run.terminal_N);
}

}  // namespace splitree
