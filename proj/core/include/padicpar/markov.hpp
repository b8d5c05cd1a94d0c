#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "padicpar/heat_kernel.hpp"
#include "padicpar/levi.hpp"
#include "padicpar/padic.hpp"
#include "padicpar/rng.hpp"

namespace padic {

/// Inverse-CDF sampler for the shell of an increment with law Z_s.
class ShellSampler {
public:
    ShellSampler(const HeatKernel& hk, double s, double tail_eps = 1e-12);

    /// Shell exponent of the increment; draws landing in an unresolved tail are redrawn.
    int draw(CounterRng& rng) const;
    int lo() const { return lo_; }
    int hi() const { return hi_; }
    /// P(‖X‖ <= p^gamma) from the table.
    double cdf(int gamma) const;

private:
    int lo_ = 0;
    int hi_ = 0;
    std::vector<double> cdf_;  // cdf_[g - lo_] = P(‖X‖ <= p^g)
};

/// One increment with law Z_{kappa dt}, placed in `window`. Shells finer than the
/// window come back as zero; shells coarser than it throw WindowError.
PAdicPoint sample_increment(const HeatKernelParams& params, double dt, CounterRng& rng, Window window = {});

enum class Scheme { exact_const, frozen_euler };
std::string to_string(Scheme s);

struct BatchConfig {
    std::uint64_t seed = 1;
    std::size_t count = 1000;
    std::vector<double> times{0.0, 1.0};  // 0 = t_0 < ... < t_K
    Window window{-40, 23};
    unsigned threads = 1;
    std::optional<PAdicPoint> x0;          // default: the origin
    int steps_per_interval = 1;            // frozen scheme only
};

/// States stored as raw digits: [trajectory][node][coordinate][window position].
class TrajectoryBatch {
public:
    TrajectoryBatch(int p, int n, Window w, std::size_t count, std::vector<double> times, std::uint64_t seed,
                    Scheme scheme);

    int prime() const { return p_; }
    int dim() const { return n_; }
    Window window() const { return w_; }
    std::size_t count() const { return count_; }
    const std::vector<double>& times() const { return times_; }
    std::uint64_t seed() const { return seed_; }
    Scheme scheme() const { return scheme_; }

    PAdicPoint state(std::size_t traj, std::size_t node) const;
    void set_state(std::size_t traj, std::size_t node, const PAdicPoint& x);
    /// Shell of X_t - X_0 (nullopt when they agree to window precision).
    Shell displacement_shell(std::size_t traj, std::size_t node) const;
    const std::vector<std::uint8_t>& raw() const { return d_; }

    /// traj_id, t, digit strings per coordinate, shell of X_t - X_0.
    void write_csv(std::ostream& os) const;

private:
    std::size_t offset(std::size_t traj, std::size_t node) const;
    int p_;
    int n_;
    Window w_;
    std::size_t count_;
    std::vector<double> times_;
    std::uint64_t seed_;
    Scheme scheme_;
    std::vector<std::uint8_t> d_;
};

/// Constant coefficients: exact independent increments between the time nodes.
TrajectoryBatch simulate(const BatchConfig& cfg, const HeatKernelParams& params);

/// Variable coefficients: the chain that represents x -> Lambda(x, t, ., 0).
/// It runs from x0 over r in [0, t] with the generator frozen at (X_r, t - r)
/// on each step; node k of the batch is r = times[k], the last node gives the
/// law of xi under Lambda(x0, t, xi, 0) with t = times.back(). Needs b = 0.
TrajectoryBatch simulate(const BatchConfig& cfg, const CoefficientField& cf);

/// Counts over the cells of B_M / B_gamma plus one bin for the outside.
struct TransitionHistogram {
    int p = 2;
    int n = 1;
    int gamma = 0;
    int M = 0;
    std::vector<std::uint64_t> counts;  // last entry: outside B_M
    std::uint64_t total = 0;

    TransitionHistogram(int p, int n, int gamma, int M);
    std::size_t bin_of(const PAdicPoint& x) const;
    void add(const PAdicPoint& x);
    void merge(const TransitionHistogram& o);
};

TransitionHistogram histogram(const TrajectoryBatch& batch, std::size_t node, int gamma, int M);

struct BallCheck {
    double t = 0.0;
    int gamma = 0;
    double empirical = 0.0;
    double exact = 0.0;
    double sigma = 0.0;
    bool pass() const { return std::abs(empirical - exact) <= 4.0 * sigma; }
};

/// Empirical P(‖X_t - X_0‖ <= p^gamma) against the kernel's ball mass.
std::vector<BallCheck> ball_mass_checks(const TrajectoryBatch& batch, const HeatKernel& hk,
                                        const std::vector<int>& gammas);

struct CellCheck {
    std::size_t state = 0;
    double empirical = 0.0;
    double exact = 0.0;
    double sigma = 0.0;
    double tolerance = 0.0;  // extra allowance for time discretisation
    bool pass() const { return std::abs(empirical - exact) <= 4.0 * sigma + tolerance; }
};

struct LambdaComparison {
    std::vector<CellCheck> cells;
    double ck_residual = 0.0;  // Chapman–Kolmogorov at the middle mesh node
    bool pass() const;
};

/// Final-node frequencies over the lumped states against the state masses of
/// Lambda(x0, t, ., 0); t must be a mesh node of `fs`.
LambdaComparison empirical_vs_lambda(const TrajectoryBatch& batch, const FundamentalSolution& fs,
                                     double tolerance = 1e-2);

}  // namespace padic
