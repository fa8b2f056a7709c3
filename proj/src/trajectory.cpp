#include "qtraj/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace qtraj {

std::uint64_t TrajectoryRng::next_u64() {
    // splitmix64: one 64-bit mix per draw, freely seedable with any value.
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double TrajectoryRng::next_uniform() {
    // 53-bit mantissa shifted into (0, 1); both endpoints excluded.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

namespace {

double bracket_step(const SystemParams& p, complexd omega) {
    double step = std::numeric_limits<double>::infinity();
    const double abs_om = std::abs(omega);
    if (abs_om > 0.0) step = std::min(step, M_PI / abs_om);
    const double total_rate = p.kappa() + p.gamma;
    if (total_rate > 0.0) step = std::min(step, 1.0 / total_rate);
    return step / 8.0;
}

double time_tolerance(const SystemParams& p) {
    const double rate = p.kappa() > 0.0 ? p.kappa() : p.gamma;
    return 1e-10 / rate;
}

// Root of p_no(t) = u on (0, t_max], given p_no(t_max) <= u.  p_no is
// monotone nonincreasing, so walk forward until it drops below u, then
// bisect.  The walk guards against plateaus near Rabi nodes.
double invert_p_no(const AmplitudeSolution& sol, const SystemParams& p, double u,
                   double t_max) {
    const double step = bracket_step(p, sol.omega());
    const double tol = time_tolerance(p);
    double lo = 0.0;
    double hi = std::min(step, t_max);
    while (sol.norm_sq(hi) > u && hi < t_max) {
        lo = hi;
        hi = std::min(hi + step, t_max);
    }
    int iter = 0;
    while (hi - lo > tol && ++iter < 200) {
        const double mid = 0.5 * (lo + hi);
        if (sol.norm_sq(mid) > u) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct Accumulator {
    std::vector<std::int64_t> jump_at;         // first grid index >= jump time
    std::vector<std::int64_t> photon_jump_at;  // same, restricted to post-tau jumps
    std::int64_t photon_total = 0;
    std::array<std::int64_t, 3> channel{0, 0, 0};

    explicit Accumulator(std::size_t grid_size)
        : jump_at(grid_size, 0), photon_jump_at(grid_size, 0) {}

    void merge(const Accumulator& other) {
        for (std::size_t i = 0; i < jump_at.size(); ++i) {
            jump_at[i] += other.jump_at[i];
            photon_jump_at[i] += other.photon_jump_at[i];
        }
        photon_total += other.photon_total;
        for (int c = 0; c < 3; ++c) channel[c] += other.channel[c];
    }
};

std::size_t grid_index_for(const std::vector<double>& grid, double t) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), t);
    return static_cast<std::size_t>(it - grid.begin());
}

EnsembleEstimate run_ensemble_impl(const SystemParams& params, std::optional<double> tau_opt,
                                   std::size_t n, const std::vector<double>& t_grid,
                                   std::uint64_t master_seed, unsigned n_threads) {
    params.validate();
    if (n == 0) throw std::invalid_argument("run_ensemble: n must be at least 1");
    if (t_grid.empty()) throw std::invalid_argument("run_ensemble: empty time grid");
    if (t_grid.front() < 0.0) throw std::invalid_argument("run_ensemble: grid must start at t >= 0");
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        if (t_grid[i] <= t_grid[i - 1]) {
            throw std::invalid_argument("run_ensemble: grid must be ascending");
        }
    }
    if (tau_opt && *tau_opt < 0.0) {
        throw std::invalid_argument("run_ensemble: tau must be nonnegative");
    }

    const double horizon = t_grid.back();
    const double tau = tau_opt ? *tau_opt : std::numeric_limits<double>::infinity();
    const AmplitudeSolution sol(params);
    const std::size_t m = t_grid.size();

    // Conditioned populations are deterministic, shared by every surviving
    // trajectory.  pb_cond is the exact complement of pa_cond so that each
    // trajectory's contribution sums to one without rounding residue.
    std::vector<double> pa_cond(m), pb_cond(m);
    for (std::size_t i = 0; i < m; ++i) {
        const NoJumpAmplitudes amp = sol.eval(t_grid[i]);
        const double s = amp.norm_sq();
        const double pa = s > 0.0 ? std::norm(amp.alpha) / s : 0.0;
        pa_cond[i] = pa;
        pb_cond[i] = 1.0 - pa;
    }

    const double cutoff = std::min(tau, horizon);
    const double p_no_cutoff = sol.norm_sq(cutoff);
    double pb_cond_tau = 0.0;
    if (tau < horizon) {
        const NoJumpAmplitudes at_tau = sol.eval(tau);
        const double s = at_tau.norm_sq();
        pb_cond_tau = s > 0.0 ? std::norm(at_tau.beta) / s : 0.0;
    }
    const double kappa = params.kappa();
    const double extraction_share = kappa > 0.0 ? params.kappa1 / kappa : 0.0;

    EnsembleEstimate est;
    est.t_grid = t_grid;
    est.n_trajectories = n;
    est.horizon = horizon;
    est.records.resize(n);

    const auto simulate_range = [&](std::size_t begin, std::size_t end, Accumulator& acc) {
        for (std::size_t idx = begin; idx < end; ++idx) {
            const std::uint64_t stream = master_seed ^ static_cast<std::uint64_t>(idx);
            TrajectoryRng rng(stream);
            std::optional<Jump> jump;
            bool photon_branch = false;

            const double u1 = rng.next_uniform();
            if (u1 >= p_no_cutoff) {
                // Jump inside the interaction window.
                const double tj = invert_p_no(sol, params, u1, cutoff);
                const double u2 = rng.next_uniform();
                jump = Jump{sample_channel(params, sol.eval(tj), u2), tj};
            } else if (tau < horizon) {
                // Survived to tau; the cavity keeps a photon with the
                // conditioned probability, then decays freely at rate kappa.
                const double u3 = rng.next_uniform();
                if (u3 < pb_cond_tau) {
                    photon_branch = true;
                    if (kappa > 0.0) {
                        const double u4 = rng.next_uniform();
                        const double tj = tau - std::log(u4) / kappa;
                        if (tj <= horizon) {
                            const double u5 = rng.next_uniform();
                            const JumpChannel ch = u5 < extraction_share
                                                       ? JumpChannel::Extraction
                                                       : JumpChannel::Absorption;
                            jump = Jump{ch, tj};
                        }
                    }
                }
            }

            est.records[idx] = TrajectoryRecord{jump, horizon, stream};
            if (photon_branch) ++acc.photon_total;
            if (jump) {
                ++acc.channel[static_cast<int>(jump->channel)];
                const std::size_t gi = grid_index_for(t_grid, jump->time);
                if (gi < m) ++acc.jump_at[gi];
                if (photon_branch && gi < m) ++acc.photon_jump_at[gi];
            }
        }
    };

    const unsigned workers =
        std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(n)));
    std::vector<Accumulator> accs(workers, Accumulator(m));
    if (workers == 1) {
        simulate_range(0, n, accs[0]);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        const std::size_t chunk = (n + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = static_cast<std::size_t>(w) * chunk;
            const std::size_t end = std::min(n, begin + chunk);
            pool.emplace_back([&, begin, end, w] { simulate_range(begin, end, accs[w]); });
        }
        for (auto& t : pool) t.join();
    }
    // All reductions are integer counts, so the merge order cannot change
    // the result in any bit.
    Accumulator total(m);
    for (const auto& acc : accs) total.merge(acc);
    est.channel_counts = total.channel;

    est.est_p_a.resize(m);
    est.est_p_b.resize(m);
    est.est_p_c.resize(m);
    est.se_a.resize(m);
    est.se_b.resize(m);
    est.se_c.resize(m);
    const double dn = static_cast<double>(n);
    std::int64_t jumped = 0;
    std::int64_t photon_jumped = 0;
    for (std::size_t i = 0; i < m; ++i) {
        jumped += total.jump_at[i];
        photon_jumped += total.photon_jump_at[i];
        if (t_grid[i] <= tau) {
            const double frac_c = static_cast<double>(jumped) / dn;
            const double alive = 1.0 - frac_c;
            const double se_alive = std::sqrt(alive * frac_c / dn);
            // Split the surviving weight so the triple sums to one exactly:
            // the larger share is a product, the smaller the exact remainder
            // (the subtraction is exact when the share taken is >= alive/2).
            double pa_est, pb_est;
            if (pa_cond[i] >= 0.5) {
                pa_est = std::max(alive * pa_cond[i], 0.5 * alive);
                pb_est = alive - pa_est;
            } else {
                pb_est = std::max(alive * pb_cond[i], 0.5 * alive);
                pa_est = alive - pb_est;
            }
            est.est_p_c[i] = frac_c;
            est.est_p_b[i] = pb_est;
            est.est_p_a[i] = pa_est;
            est.se_a[i] = pa_cond[i] * se_alive;
            est.se_b[i] = pb_cond[i] * se_alive;
            est.se_c[i] = se_alive;
        } else {
            // Atom traced out: the grid point sees only the cavity photon.
            const double in_cavity = static_cast<double>(total.photon_total - photon_jumped);
            const double frac_b = in_cavity / dn;
            const double se = std::sqrt(frac_b * (1.0 - frac_b) / dn);
            est.est_p_a[i] = 0.0;
            est.est_p_b[i] = frac_b;
            est.est_p_c[i] = 1.0 - frac_b;
            est.se_a[i] = 0.0;
            est.se_b[i] = se;
            est.se_c[i] = se;
        }
    }
    return est;
}

}  // namespace

std::optional<double> sample_jump_time(const SystemParams& p, double u, double horizon) {
    p.validate();
    if (!(u > 0.0 && u < 1.0)) {
        throw std::invalid_argument("sample_jump_time: u must lie in the open interval (0, 1)");
    }
    if (!(horizon > 0.0)) {
        throw std::invalid_argument("sample_jump_time: horizon must be positive");
    }
    const AmplitudeSolution sol(p);
    if (sol.norm_sq(horizon) > u) return std::nullopt;  // survives past the horizon
    return invert_p_no(sol, p, u, horizon);
}

JumpChannel sample_channel(const SystemParams& p, const NoJumpAmplitudes& at_jump,
                           double u2) {
    const JumpRates rates = jump_rates(at_jump, p);
    const double total = rates.total();
    if (total <= 0.0) {
        throw std::invalid_argument("sample_channel: total jump rate is zero");
    }
    const double x = u2 * total;
    if (x < rates.extraction) return JumpChannel::Extraction;
    if (x < rates.extraction + rates.absorption) return JumpChannel::Absorption;
    return JumpChannel::Spontaneous;
}

EnsembleEstimate run_ensemble(const SystemParams& p, std::size_t n,
                              const std::vector<double>& t_grid,
                              std::uint64_t master_seed, unsigned n_threads) {
    return run_ensemble_impl(p, std::nullopt, n, t_grid, master_seed, n_threads);
}

EnsembleEstimate run_ensemble(const TruncatedScenario& s, std::size_t n,
                              const std::vector<double>& t_grid,
                              std::uint64_t master_seed, unsigned n_threads) {
    return run_ensemble_impl(s.params, s.tau, n, t_grid, master_seed, n_threads);
}

ClickHistogram click_histogram(const EnsembleEstimate& ensemble, JumpChannel channel,
                               double bin_width) {
    if (!(bin_width > 0.0)) {
        throw std::invalid_argument("click_histogram: bin width must be positive");
    }
    ClickHistogram hist;
    hist.bin_width = bin_width;
    hist.horizon = ensemble.horizon;
    hist.n_trajectories = ensemble.n_trajectories;
    const auto n_bins =
        static_cast<std::size_t>(std::ceil(ensemble.horizon / bin_width - 1e-9));
    hist.counts.assign(std::max<std::size_t>(n_bins, 1), 0);
    for (const auto& rec : ensemble.records) {
        if (!rec.jump || rec.jump->channel != channel) continue;
        auto bin = static_cast<std::size_t>(rec.jump->time / bin_width);
        bin = std::min(bin, hist.counts.size() - 1);
        ++hist.counts[bin];
    }
    hist.density.resize(hist.counts.size());
    const double norm = static_cast<double>(ensemble.n_trajectories) * bin_width;
    for (std::size_t k = 0; k < hist.counts.size(); ++k) {
        hist.density[k] = static_cast<double>(hist.counts[k]) / norm;
    }
    return hist;
}

}  // namespace qtraj
