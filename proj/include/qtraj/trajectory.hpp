// trajectory.hpp — stochastic unraveling of the master equation by the
// Monte Carlo wave-function (delay-function) method.  Jump times are sampled
// by inverting the closed-form survival probability, so no small-timestep
// integration is involved.  Ensembles are reproducible bit-for-bit for a
// given master seed, independent of the number of worker threads.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "qtraj/analytic.hpp"
#include "qtraj/model.hpp"

namespace qtraj {

enum class JumpChannel : int { Extraction = 0, Absorption = 1, Spontaneous = 2 };

struct Jump {
    JumpChannel channel = JumpChannel::Extraction;
    double time = 0.0;
};

// One stochastic realization.  A trajectory holds at most one jump: the
// post-jump state is absorbing, nothing else can happen.
struct TrajectoryRecord {
    std::optional<Jump> jump;
    double horizon = 0.0;
    std::uint64_t seed_index = 0;
};

// Ensemble averages on a time grid.  est_p_a + est_p_b + est_p_c == 1
// exactly at every grid point: a trajectory is either still in the
// conditioned two-level state (contributing its conditioned populations,
// which sum to one by construction) or has collapsed to |c>.
struct EnsembleEstimate {
    std::vector<double> t_grid;
    std::vector<double> est_p_a, est_p_b, est_p_c;
    std::vector<double> se_a, se_b, se_c;  // per-point standard errors
    std::array<std::int64_t, 3> channel_counts{0, 0, 0};  // indexed by JumpChannel
    std::size_t n_trajectories = 0;
    double horizon = 0.0;
    std::vector<TrajectoryRecord> records;  // in trajectory-index order
};

// Splittable counter-style generator (splitmix64).  Each trajectory gets an
// independent stream derived from master_seed ^ index, which makes ensembles
// reproducible under any work partition.
class TrajectoryRng {
  public:
    explicit TrajectoryRng(std::uint64_t stream_seed) : state_(stream_seed) {}

    std::uint64_t next_u64();
    // Uniform on the open interval (0, 1).
    double next_uniform();

  private:
    std::uint64_t state_;
};

// Invert p_no(t*) = u on (0, horizon].  Returns nothing when the trajectory
// survives past the horizon (u < p_no(horizon)).  Requires 0 < u < 1.
std::optional<double> sample_jump_time(const SystemParams& p, double u, double horizon);

// Pick the jump channel with probabilities proportional to
// kappa1 |beta|^2 : kappa2 |beta|^2 : gamma |alpha|^2 at the jump time.
// Throws when the total rate vanishes.
JumpChannel sample_channel(const SystemParams& p, const NoJumpAmplitudes& at_jump,
                           double u2);

EnsembleEstimate run_ensemble(const SystemParams& p, std::size_t n,
                              const std::vector<double>& t_grid,
                              std::uint64_t master_seed, unsigned n_threads = 1);

// Truncated interaction: trajectories follow the continuous dynamics up to
// tau; a trajectory that survives to tau holds a photon with the conditioned
// probability |beta(tau)|^2 / p_no(tau) (Bernoulli draw), after which only
// the cavity decay channels at total rate kappa remain.  For t > tau the
// atom is traced out: est_p_a is identically zero there and est_p_b is the
// photon-inside-cavity population.
EnsembleEstimate run_ensemble(const TruncatedScenario& s, std::size_t n,
                              const std::vector<double>& t_grid,
                              std::uint64_t master_seed, unsigned n_threads = 1);

// Histogram of jump times of one channel.  density[k] = counts[k] / (n T)
// estimates the instantaneous jump rate of the channel (for extraction,
// kappa1 |beta(t)|^2, which is the photodetection rate at unit efficiency).
struct ClickHistogram {
    double bin_width = 0.0;
    double horizon = 0.0;
    std::size_t n_trajectories = 0;
    std::vector<std::int64_t> counts;
    std::vector<double> density;

    double bin_center(std::size_t k) const { return (static_cast<double>(k) + 0.5) * bin_width; }
};

ClickHistogram click_histogram(const EnsembleEstimate& ensemble, JumpChannel channel,
                               double bin_width);

}  // namespace qtraj
