#include "padicpar/markov.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace padic {

namespace {

double ppow(int p, double e) { return std::pow(static_cast<double>(p), e); }

// Adds a random increment on shell gamma to the digit block `x` (n coordinates
// of `width` digits starting at position lo). Same law as sample_shell.
void add_shell_increment(std::uint8_t* x, int p, int n, Window w, int gamma, CounterRng& rng) {
    const int lead = -gamma;
    if (lead > w.hi) return;  // finer than the stored precision
    if (lead < w.lo) throw WindowError("precision window too narrow for shell");
    const std::size_t width = static_cast<std::size_t>(w.width());
    std::uint64_t total = 1;
    for (int i = 0; i < n; ++i) total *= static_cast<std::uint64_t>(p);
    std::uint64_t code = 1 + rng.below(total - 1);
    for (int c = 0; c < n; ++c) {
        const int lv = static_cast<int>(code % static_cast<std::uint64_t>(p));
        code /= static_cast<std::uint64_t>(p);
        std::uint8_t* d = x + static_cast<std::size_t>(c) * width;
        int carry = 0;
        for (int j = lead; j <= w.hi; ++j) {
            const int inc = j == lead ? lv : static_cast<int>(rng.below(static_cast<std::uint64_t>(p)));
            int s = d[j - w.lo] + inc + carry;
            carry = s >= p ? 1 : 0;
            d[j - w.lo] = static_cast<std::uint8_t>(s - carry * p);
        }
    }
}

// Lowest position where two digit blocks differ, as a shell exponent.
Shell diff_shell(const std::uint8_t* a, const std::uint8_t* b, int n, Window w) {
    const std::size_t width = static_cast<std::size_t>(w.width());
    int best = w.hi + 1;
    for (int c = 0; c < n; ++c)
        for (int j = w.lo; j < best; ++j)
            if (a[c * width + static_cast<std::size_t>(j - w.lo)] != b[c * width + static_cast<std::size_t>(j - w.lo)]) {
                best = j;
                break;
            }
    if (best > w.hi) return std::nullopt;
    return -best;
}

// ‖x‖ exponent of a digit block.
Shell norm_shell(const std::uint8_t* a, int n, Window w) {
    const std::size_t width = static_cast<std::size_t>(w.width());
    int best = w.hi + 1;
    for (int c = 0; c < n; ++c)
        for (int j = w.lo; j < best; ++j)
            if (a[c * width + static_cast<std::size_t>(j - w.lo)] != 0) {
                best = j;
                break;
            }
    if (best > w.hi) return std::nullopt;
    return -best;
}

void run_parallel(std::size_t count, unsigned threads, const std::function<void(std::size_t, std::size_t)>& body) {
    threads = std::max(1u, threads);
    if (threads == 1 || count < 2) {
        body(0, count);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (count + threads - 1) / threads;
    for (unsigned k = 0; k < threads; ++k) {
        const std::size_t a = k * chunk, b = std::min(count, a + chunk);
        if (a >= b) break;
        pool.emplace_back(body, a, b);
    }
    for (auto& th : pool) th.join();
}

PAdicPoint origin_or(const BatchConfig& cfg, int p, int n) {
    return cfg.x0 ? *cfg.x0 : PAdicPoint::zero(p, n, cfg.window);
}

void check_times(const std::vector<double>& t) {
    if (t.empty() || t.front() != 0.0) throw std::invalid_argument("time grid must start at 0");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] >= t[i - 1])) throw std::invalid_argument("time grid must not decrease");
}

}  // namespace

ShellSampler::ShellSampler(const HeatKernel& hk, double s, double tail_eps) {
    if (!(s > 0.0)) throw std::domain_error("increment sampler needs dt > 0");
    int lo = 0, hi = 0;
    while (hk.ball_mass_s(lo, s).inside >= tail_eps) {
        if (--lo < -100000) throw std::range_error("increment law not resolved at small radii");
    }
    while (hk.ball_mass_s(hi, s).outside >= tail_eps) {
        if (++hi > 100000) throw std::range_error("increment law not resolved at large radii");
    }
    lo_ = lo;
    hi_ = hi;
    for (int g = lo; g <= hi; ++g) cdf_.push_back(hk.ball_mass_s(g, s).inside);
}

double ShellSampler::cdf(int gamma) const {
    if (gamma < lo_) return 0.0;
    if (gamma > hi_) return 1.0;
    return cdf_[static_cast<std::size_t>(gamma - lo_)];
}

int ShellSampler::draw(CounterRng& rng) const {
    for (;;) {
        const double u = rng.uniform01();
        // unresolved tails: below B_lo or beyond B_hi
        if (u < cdf_.front() || u >= cdf_.back()) continue;
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return lo_ + static_cast<int>(it - cdf_.begin());
    }
}

PAdicPoint sample_increment(const HeatKernelParams& params, double dt, CounterRng& rng, Window window) {
    HeatKernel hk(params);
    ShellSampler sm(hk, hk.kappa() * dt);
    const int g = sm.draw(rng);
    PAdicPoint zero = PAdicPoint::zero(params.p, params.n, window);
    if (-g > window.hi) return zero;
    return sample_shell(zero, g, rng);
}

std::string to_string(Scheme s) { return s == Scheme::exact_const ? "exact-const" : "frozen-euler"; }

TrajectoryBatch::TrajectoryBatch(int p, int n, Window w, std::size_t count, std::vector<double> times,
                                 std::uint64_t seed, Scheme scheme)
    : p_(p), n_(n), w_(w), count_(count), times_(std::move(times)), seed_(seed), scheme_(scheme) {
    if (p > 255) throw std::invalid_argument("digit storage holds primes below 256");
    d_.assign(count_ * times_.size() * static_cast<std::size_t>(n_) * static_cast<std::size_t>(w_.width()), 0);
}

std::size_t TrajectoryBatch::offset(std::size_t traj, std::size_t node) const {
    return (traj * times_.size() + node) * static_cast<std::size_t>(n_) * static_cast<std::size_t>(w_.width());
}

PAdicPoint TrajectoryBatch::state(std::size_t traj, std::size_t node) const {
    const std::size_t o = offset(traj, node);
    std::vector<PAdicScalar> c;
    const std::size_t width = static_cast<std::size_t>(w_.width());
    for (int k = 0; k < n_; ++k) {
        std::vector<int> d(width);
        for (std::size_t j = 0; j < width; ++j) d[j] = d_[o + static_cast<std::size_t>(k) * width + j];
        c.push_back(PAdicScalar::from_digits(p_, w_, std::move(d)));
    }
    return PAdicPoint(std::move(c));
}

void TrajectoryBatch::set_state(std::size_t traj, std::size_t node, const PAdicPoint& x) {
    if (x.dim() != n_ || x.prime() != p_) throw std::invalid_argument("state on a different space");
    const std::size_t o = offset(traj, node);
    const std::size_t width = static_cast<std::size_t>(w_.width());
    for (int k = 0; k < n_; ++k) {
        if (x[k].window().lo < w_.lo) {
            for (int j = x[k].window().lo; j < w_.lo; ++j)
                if (x[k].digit(j) != 0) throw WindowError("state does not fit the batch window");
        }
        for (int j = w_.lo; j <= w_.hi; ++j)
            d_[o + static_cast<std::size_t>(k) * width + static_cast<std::size_t>(j - w_.lo)] =
                static_cast<std::uint8_t>(x[k].digit(j));
    }
}

Shell TrajectoryBatch::displacement_shell(std::size_t traj, std::size_t node) const {
    return diff_shell(d_.data() + offset(traj, node), d_.data() + offset(traj, 0), n_, w_);
}

void TrajectoryBatch::write_csv(std::ostream& os) const {
    os << "traj_id,t";
    for (int k = 0; k < n_; ++k) os << ",x" << k;
    os << ",shell\n";
    for (std::size_t i = 0; i < count_; ++i)
        for (std::size_t k = 0; k < times_.size(); ++k) {
            const PAdicPoint x = state(i, k);
            os << i << ',' << times_[k];
            for (int c = 0; c < n_; ++c) os << ',' << x[c].digit_string();
            const Shell s = displacement_shell(i, k);
            os << ',';
            if (s) os << *s;
            else os << "origin";
            os << '\n';
        }
}

TrajectoryBatch simulate(const BatchConfig& cfg, const HeatKernelParams& params) {
    check_times(cfg.times);
    const HeatKernel hk(params);
    const int p = params.p, n = params.n;
    TrajectoryBatch batch(p, n, cfg.window, cfg.count, cfg.times, cfg.seed, Scheme::exact_const);
    std::vector<std::optional<ShellSampler>> samplers;
    for (std::size_t k = 1; k < cfg.times.size(); ++k) {
        const double dt = cfg.times[k] - cfg.times[k - 1];
        if (dt > 0.0) samplers.emplace_back(ShellSampler(hk, hk.kappa() * dt));
        else samplers.emplace_back(std::nullopt);
    }
    for (const auto& s : samplers)
        if (s && -s->hi() < cfg.window.lo) throw WindowError("precision window too narrow for the increment law");
    const PAdicPoint x0 = origin_or(cfg, p, n);
    for (std::size_t i = 0; i < cfg.count; ++i) batch.set_state(i, 0, x0);
    const std::size_t block = static_cast<std::size_t>(n) * static_cast<std::size_t>(cfg.window.width());
    std::uint8_t* base = const_cast<std::uint8_t*>(batch.raw().data());
    const std::size_t nodes = cfg.times.size();
    run_parallel(cfg.count, cfg.threads, [&](std::size_t a, std::size_t b) {
        for (std::size_t i = a; i < b; ++i) {
            CounterRng rng(cfg.seed, i);
            for (std::size_t k = 1; k < nodes; ++k) {
                std::uint8_t* cur = base + (i * nodes + k) * block;
                std::copy(cur - block, cur, cur);
                if (samplers[k - 1]) add_shell_increment(cur, p, n, cfg.window, samplers[k - 1]->draw(rng), rng);
            }
        }
    });
    return batch;
}

TrajectoryBatch simulate(const BatchConfig& cfg, const CoefficientField& cf) {
    cf.validate();
    check_times(cfg.times);
    if (!cf.b_zero()) throw std::domain_error("simulation needs b = 0 (no killing)");
    const int p = cf.p, n = cf.n;
    const double t_end = cfg.times.back();
    if (t_end > cf.T * (1.0 + 1e-12)) throw std::out_of_range("simulation horizon beyond T");
    const int spi = std::max(1, cfg.steps_per_interval);
    std::vector<HeatKernel> kernels;
    kernels.emplace_back(HeatKernelParams::power(p, n, cf.alpha, 1.0));
    for (double a : cf.alphas) kernels.emplace_back(HeatKernelParams::power(p, n, a, 1.0));
    const LocallyConstantFn& g0 = cf.a0.front();
    const int M = g0.M();
    const int far = -cfg.window.lo;  // largest representable shell

    // coefficient on a state: flat cell index, or the exterior shell
    auto coef = [&](const std::vector<LocallyConstantFn>& samples, double t, std::size_t cell, Shell ext) {
        std::size_t i = 0;
        double w = 0.0;
        if (cf.times.size() > 1 && t > cf.times.front()) {
            if (t >= cf.times.back()) {
                i = cf.times.size() - 1;
            } else {
                i = static_cast<std::size_t>(std::upper_bound(cf.times.begin(), cf.times.end(), t) - cf.times.begin()) - 1;
                w = (t - cf.times[i]) / (cf.times[i + 1] - cf.times[i]);
            }
        }
        auto val = [&](const LocallyConstantFn& f) { return ext ? f.exterior(*ext) : f[cell]; };
        const double v0 = val(samples[i]);
        return w == 0.0 ? v0 : (1.0 - w) * v0 + w * val(samples[i + 1]);
    };

    // steps: chain time r_j; each uses the field at physical time t_end - r_j
    struct Step {
        double r = 0.0;
        double dt = 0.0;
        std::size_t node = 0;  // batch node reached at the end of the step, or npos
        // per operator: coefficient value -> sampler
        std::vector<std::map<double, ShellSampler>> samplers;
    };
    std::vector<Step> steps;
    for (std::size_t k = 1; k < cfg.times.size(); ++k) {
        const double a = cfg.times[k - 1], b = cfg.times[k];
        for (int j = 0; j < spi; ++j) {
            Step st;
            st.r = a + (b - a) * j / spi;
            st.dt = (b - a) / spi;
            st.node = j + 1 == spi ? k : static_cast<std::size_t>(-1);
            steps.push_back(std::move(st));
        }
    }
    std::vector<const std::vector<LocallyConstantFn>*> fields{&cf.a0};
    for (const auto& ak : cf.a) fields.push_back(&ak);
    for (auto& st : steps) {
        st.samplers.resize(fields.size());
        if (!(st.dt > 0.0)) continue;
        const double tphys = t_end - st.r;
        for (std::size_t op = 0; op < fields.size(); ++op) {
            auto add = [&](double c) {
                if (c > 0.0 && !st.samplers[op].count(c))
                    st.samplers[op].emplace(c, ShellSampler(kernels[op], c * st.dt));
            };
            for (std::size_t c = 0; c < g0.cells(); ++c) add(coef(*fields[op], tphys, c, std::nullopt));
            for (int k = M + 1; k <= far; ++k) add(coef(*fields[op], tphys, 0, Shell{k}));
        }
        for (const auto& m : st.samplers)
            for (const auto& kv : m)
                if (-kv.second.hi() < cfg.window.lo)
                    throw WindowError("precision window too narrow for the increment law");
    }

    TrajectoryBatch batch(p, n, cfg.window, cfg.count, cfg.times, cfg.seed, Scheme::frozen_euler);
    const PAdicPoint x0 = origin_or(cfg, p, n);
    for (std::size_t i = 0; i < cfg.count; ++i) batch.set_state(i, 0, x0);
    const std::size_t block = static_cast<std::size_t>(n) * static_cast<std::size_t>(cfg.window.width());
    const std::size_t nodes = cfg.times.size();
    std::uint8_t* base = const_cast<std::uint8_t*>(batch.raw().data());
    const int ell = g0.ell();
    const std::size_t side = g0.side();
    const std::size_t width = static_cast<std::size_t>(cfg.window.width());
    run_parallel(cfg.count, cfg.threads, [&](std::size_t a, std::size_t b) {
        std::vector<std::uint8_t> x(block);
        for (std::size_t i = a; i < b; ++i) {
            CounterRng rng(cfg.seed, i);
            std::copy(base + i * nodes * block, base + i * nodes * block + block, x.begin());
            for (const auto& st : steps) {
                if (st.dt > 0.0) {
                    const double tphys = t_end - st.r;
                    const Shell sh = norm_shell(x.data(), n, cfg.window);
                    std::size_t cell = 0;
                    Shell ext;
                    if (sh && *sh > M) {
                        ext = *sh;
                    } else {
                        std::size_t stride = 1;
                        for (int c = 0; c < n; ++c) {
                            std::size_t v = 0, mul = 1;
                            for (int j = -M; j <= -ell - 1; ++j, mul *= static_cast<std::size_t>(p))
                                v += x[static_cast<std::size_t>(c) * width + static_cast<std::size_t>(j - cfg.window.lo)] * mul;
                            cell += v * stride;
                            stride *= side;
                        }
                    }
                    for (std::size_t op = 0; op < fields.size(); ++op) {
                        const double c = coef(*fields[op], tphys, cell, ext);
                        if (!(c > 0.0)) continue;
                        const ShellSampler& sm = st.samplers[op].at(c);
                        add_shell_increment(x.data(), p, n, cfg.window, sm.draw(rng), rng);
                    }
                }
                if (st.node != static_cast<std::size_t>(-1))
                    std::copy(x.begin(), x.end(), base + (i * nodes + st.node) * block);
            }
        }
    });
    return batch;
}

TransitionHistogram::TransitionHistogram(int p_, int n_, int gamma_, int M_) : p(p_), n(n_), gamma(gamma_), M(M_) {
    if (M < gamma) throw std::invalid_argument("histogram needs M >= gamma");
    std::size_t cells = 1;
    for (int c = 0; c < n; ++c)
        for (int j = gamma; j < M; ++j) cells *= static_cast<std::size_t>(p);
    counts.assign(cells + 1, 0);
}

std::size_t TransitionHistogram::bin_of(const PAdicPoint& x) const {
    const auto k = x.norm_exp();
    if (k && *k > M) return counts.size() - 1;
    std::size_t side = 1;
    for (int j = gamma; j < M; ++j) side *= static_cast<std::size_t>(p);
    std::size_t flat = 0, stride = 1;
    for (int c = 0; c < n; ++c) {
        std::size_t v = 0, mul = 1;
        for (int j = -M; j <= -gamma - 1; ++j, mul *= static_cast<std::size_t>(p))
            v += static_cast<std::size_t>(x[c].digit(j)) * mul;
        flat += v * stride;
        stride *= side;
    }
    return flat;
}

void TransitionHistogram::add(const PAdicPoint& x) {
    ++counts[bin_of(x)];
    ++total;
}

void TransitionHistogram::merge(const TransitionHistogram& o) {
    if (o.p != p || o.n != n || o.gamma != gamma || o.M != M) throw std::invalid_argument("histograms differ in layout");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
    total += o.total;
}

TransitionHistogram histogram(const TrajectoryBatch& batch, std::size_t node, int gamma, int M) {
    TransitionHistogram h(batch.prime(), batch.dim(), gamma, M);
    for (std::size_t i = 0; i < batch.count(); ++i) h.add(batch.state(i, node));
    return h;
}

std::vector<BallCheck> ball_mass_checks(const TrajectoryBatch& batch, const HeatKernel& hk,
                                        const std::vector<int>& gammas) {
    std::vector<BallCheck> out;
    const double N = static_cast<double>(batch.count());
    for (std::size_t k = 1; k < batch.times().size(); ++k) {
        const double t = batch.times()[k];
        if (!(t > 0.0)) continue;
        std::vector<Shell> shells(batch.count());
        for (std::size_t i = 0; i < batch.count(); ++i) shells[i] = batch.displacement_shell(i, k);
        for (int g : gammas) {
            std::size_t inside = 0;
            for (const auto& s : shells)
                if (!s || *s <= g) ++inside;
            BallCheck c;
            c.t = t;
            c.gamma = g;
            c.empirical = inside / N;
            c.exact = hk.ball_prob(g, t);
            c.sigma = std::sqrt(c.exact * (1.0 - c.exact) / N);
            out.push_back(c);
        }
    }
    return out;
}

bool LambdaComparison::pass() const {
    for (const auto& c : cells)
        if (!c.pass()) return false;
    return true;
}

LambdaComparison empirical_vs_lambda(const TrajectoryBatch& batch, const FundamentalSolution& fs, double tolerance) {
    if (!fs.field().b_zero()) throw std::domain_error("comparison needs b = 0");
    const std::size_t last = batch.times().size() - 1;
    const double t = batch.times()[last];
    const std::size_t ti = fs.node(t);
    const std::size_t x0 = fs.state_of(batch.state(0, 0));
    const DenseMatrix L = fs.lambda_mass(t, 0);
    std::vector<std::uint64_t> counts(fs.states(), 0);
    for (std::size_t i = 0; i < batch.count(); ++i) {
        const PAdicPoint x = batch.state(i, last);
        const auto k = x.norm_exp();
        const int far = fs.field().M() + static_cast<int>(fs.states() - fs.cell_states());
        if (k && *k > far) continue;
        ++counts[fs.state_of(x)];
    }
    LambdaComparison rep;
    const double N = static_cast<double>(batch.count());
    for (std::size_t s = 0; s < fs.states(); ++s) {
        CellCheck c;
        c.state = s;
        c.empirical = counts[s] / N;
        c.exact = L(x0, s);
        const double q = std::clamp(c.exact, 0.0, 1.0);
        c.sigma = std::sqrt(q * (1.0 - q) / N);
        c.tolerance = tolerance;
        rep.cells.push_back(c);
    }
    if (ti >= 2) rep.ck_residual = chapman_kolmogorov_residual(fs, ti, ti / 2, 0, x0, x0);
    return rep;
}

}  // namespace padic
