#include "padicpar/function_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace padic {

namespace {

double ppow(int p, double e) { return std::pow(static_cast<double>(p), e); }

std::size_t ipow(std::size_t b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

constexpr std::size_t kHardCellCap = std::size_t{1} << 24;

// Table on [lo, lo + size) and a sum of powers beyond it.
struct ShellSeq {
    int lo = 0;
    std::vector<double> table;
    std::vector<PowerTail> powers;

    int end() const { return lo + static_cast<int>(table.size()) - 1; }
    double at(int p, int k) const {
        if (k >= lo && k <= end()) return table[static_cast<std::size_t>(k - lo)];
        if (k < lo) throw std::logic_error("shell sequence evaluated below its range");
        double s = 0.0;
        for (const auto& t : powers) s += t.at(p, k);
        return s;
    }
};

ShellSeq seq_of(const RadialTail& t) { return {t.M + 1, t.table, t.powers}; }

ShellSeq ones() { return {0, {}, {PowerTail{0.0, 1.0}}}; }

ShellSeq inverse_w(const RadialProfile& w, int from) {
    ShellSeq s;
    s.lo = from;
    for (int k = from; k <= w.m_hi(); ++k) s.table.push_back(1.0 / w(k));
    s.powers.push_back({-w.upper().s, 1.0 / w.upper().c});
    return s;
}

// sum_{k >= from} A_k B_k vs(k)
double sum_product_vs(int p, int n, const ShellSeq& A, const ShellSeq& B, int from) {
    const double shell = 1.0 - ppow(p, -n);
    const int K = std::max(A.end(), B.end());
    double sum = 0.0;
    for (int k = from; k <= K; ++k) sum += A.at(p, k) * B.at(p, k) * ppow(p, double(k) * n) * shell;
    const int k0 = std::max(from, K + 1);
    for (const auto& a : A.powers)
        for (const auto& b : B.powers) {
            if (a.c == 0.0 || b.c == 0.0) continue;
            const double e = a.s + b.s + n;
            if (!(e < 0.0)) throw std::domain_error("divergent tail sum: growth too fast for the kernel");
            sum += a.c * b.c * shell * ppow(p, k0 * e) / (1.0 - ppow(p, e));
        }
    return sum;
}

// Two-shell geometric fit, used to continue an output table past its end.
PowerTail fit_tail(int p, int k1, double v1, int k2, double v2) {
    if (v1 == 0.0 || v2 == 0.0 || (v1 > 0) != (v2 > 0)) return {0.0, 0.0};
    const double s = std::log(v2 / v1) / ((k2 - k1) * std::log(static_cast<double>(p)));
    return {s, v2 / ppow(p, k2 * s)};
}

RadialTail finish_tail(int p, int M, std::vector<double> table) {
    RadialTail t;
    t.M = M;
    const int K = static_cast<int>(table.size());
    if (K >= 2) t.powers.push_back(fit_tail(p, M + K - 1, table[K - 2], M + K, table[K - 1]));
    t.table = std::move(table);
    return t;
}

// Level sums: level r (ell <= r <= M) holds ∫ over the balls of radius p^r,
// indexed per coordinate by a mod p^{M-r}.
std::vector<std::vector<double>> ball_sums(const LocallyConstantFn& f) {
    const int p = f.prime();
    const int n = f.dim();
    const int D = f.digits();
    std::vector<std::vector<double>> lv(static_cast<std::size_t>(D + 1));
    lv[0] = f.values();
    const double vol = f.cell_volume();
    for (double& x : lv[0]) x *= vol;
    for (int r = 1; r <= D; ++r) {
        const std::size_t qb = ipow(static_cast<std::size_t>(p), D - r + 1);
        const std::size_t q = qb / static_cast<std::size_t>(p);
        const std::size_t out_size = ipow(q, n);
        std::vector<double> out(out_size, 0.0);
        const auto& in = lv[static_cast<std::size_t>(r - 1)];
        for (std::size_t i = 0; i < in.size(); ++i) {
            std::size_t rem = i, o = 0, stride = 1;
            for (int c = 0; c < n; ++c) {
                const std::size_t a = rem % qb;
                rem /= qb;
                o += (a % q) * stride;
                stride *= q;
            }
            out[o] += in[i];
        }
        lv[static_cast<std::size_t>(r)] = std::move(out);
    }
    return lv;
}

std::size_t reduce_index(std::size_t flat, std::size_t side, int n, std::size_t q) {
    std::size_t o = 0, stride = 1;
    for (int c = 0; c < n; ++c) {
        o += ((flat % side) % q) * stride;
        flat /= side;
        stride *= q;
    }
    return o;
}

void check_budget(const LocallyConstantFn& f, const FunctionSpaceConfig& cfg) {
    if (f.cells() > cfg.max_cells) throw std::length_error("levels exceed the configured transform size");
}

// Exterior of W_w f for shells M+1 .. M+K (shared by both W routes).
std::vector<double> w_exterior(const RadialProfile& w, const LocallyConstantFn& f, int K) {
    const int p = f.prime();
    const int n = f.dim();
    const int M = f.M();
    const ShellSeq T = f.tail() ? seq_of(*f.tail()) : ShellSeq{M + 1, {}, {}};
    const double shell = 1.0 - ppow(p, -n);
    std::vector<double> out;
    double I = f.interior_integral();
    for (int b = M + 1; b <= M + K; ++b) {
        const double Tb = T.at(p, b);
        I += Tb * ppow(p, double(b) * n) * shell;
        const ShellSeq iw = inverse_w(w, b + 1);
        const double ts = sum_product_vs(p, n, T, iw, b + 1);
        const double cout = sum_product_vs(p, n, ones(), iw, b + 1);
        const double sw = shell_weight(w, b) / shell;  // p^{bn}/w(p^b)
        out.push_back(I / w(b) - Tb * sw + ts - Tb * cout);
    }
    return out;
}

void check_growth(const RadialProfile& w, const LocallyConstantFn& f) {
    const double a = w.alpha();
    const int n = f.dim();
    double g = f.tail() ? f.tail()->growth_exponent() : -std::numeric_limits<double>::infinity();
    if (g >= a - n || (f.tail() && f.lambda >= a - n))
        throw std::domain_error("W_gamma needs gamma - n > lambda");
}

LocallyConstantFn finish(LocallyConstantFn out, double lambda) {
    out.lambda = lambda;
    out.growth_C = mlambda_norm(out, lambda);
    return out;
}

}  // namespace

double RadialTail::at(int p, int k) const {
    if (k <= M) throw std::logic_error("radial tail evaluated inside B_M");
    if (k <= table_end()) return table[static_cast<std::size_t>(k - M - 1)];
    double s = 0.0;
    for (const auto& t : powers) s += t.at(p, k);
    return s;
}

RadialTail RadialTail::power(int M, double s, double c) { return RadialTail{M, {}, {PowerTail{s, c}}}; }

double RadialTail::growth_exponent() const {
    double g = -std::numeric_limits<double>::infinity();
    for (const auto& t : powers)
        if (t.c != 0.0) g = std::max(g, t.s);
    return g;
}

LocallyConstantFn::LocallyConstantFn(int p, int n, int ell, int M) : p_(p), n_(n), ell_(ell), M_(M) {
    if (p < 2 || n < 1) throw std::invalid_argument("bad (p, n)");
    if (M < ell) throw std::invalid_argument("grid needs M >= ell");
    side_ = ipow(static_cast<std::size_t>(p), M - ell);
    const std::size_t total = ipow(side_, n);
    if (total > kHardCellCap || side_ == 0) throw std::length_error("cell grid too large");
    v_.assign(total, 0.0);
}

double LocallyConstantFn::cell_volume() const { return ppow(p_, double(ell_) * n_); }

void LocallyConstantFn::set_tail(std::optional<RadialTail> t) {
    if (t && t->M != M_) throw std::invalid_argument("tail level must equal M");
    tail_ = std::move(t);
}

double LocallyConstantFn::exterior(int k) const {
    if (k <= M_) throw std::logic_error("exterior shell inside B_M");
    return tail_ ? tail_->at(p_, k) : 0.0;
}

LocallyConstantFn LocallyConstantFn::from_pieces(int p, int n, int ell, int M, const std::vector<Piece>& pieces,
                                                 std::optional<RadialTail> tail) {
    LocallyConstantFn f(p, n, ell, M);
    const int D = M - ell;
    for (const auto& pc : pieces) {
        const Ball& b = pc.ball;
        if (b.center.prime() != p || b.center.dim() != n) throw std::invalid_argument("piece on a different space");
        if (b.radius_exp < ell) throw std::invalid_argument("piece radius below the constancy level");
        if (b.radius_exp > M) throw std::invalid_argument("piece extends past B_M");
        auto cn = b.center.norm_exp();
        if (cn && *cn > M) throw std::invalid_argument("piece center outside B_M");
        // fixed digits: positions -M .. -r-1 (indices 0 .. M-r-1)
        const int fixed = M - b.radius_exp;
        std::vector<std::size_t> prefix(static_cast<std::size_t>(n), 0);
        for (int c = 0; c < n; ++c) {
            std::size_t a = 0, mul = 1;
            for (int i = 0; i < fixed; ++i, mul *= static_cast<std::size_t>(p))
                a += static_cast<std::size_t>(b.center[c].digit(-M + i)) * mul;
            prefix[static_cast<std::size_t>(c)] = a;
        }
        const std::size_t q = ipow(static_cast<std::size_t>(p), fixed);
        const std::size_t free_per = ipow(static_cast<std::size_t>(p), D - fixed);
        const std::size_t combos = ipow(free_per, n);
        for (std::size_t t = 0; t < combos; ++t) {
            std::size_t rem = t, flat = 0, stride = 1;
            for (int c = 0; c < n; ++c) {
                const std::size_t hi = rem % free_per;
                rem /= free_per;
                flat += (prefix[static_cast<std::size_t>(c)] + hi * q) * stride;
                stride *= f.side_;
            }
            f.v_[flat] += pc.coeff;
        }
    }
    f.set_tail(std::move(tail));
    f.lambda = f.tail_ ? std::max(0.0, f.tail_->growth_exponent()) : 0.0;
    f.growth_C = mlambda_norm(f, f.lambda);
    return f;
}

LocallyConstantFn LocallyConstantFn::from_radial(int p, int n, int ell, int M, const std::function<double(Shell)>& g,
                                                 std::optional<RadialTail> tail) {
    LocallyConstantFn f(p, n, ell, M);
    for (std::size_t i = 0; i < f.v_.size(); ++i) f.v_[i] = g(f.cell_shell(i));
    f.set_tail(std::move(tail));
    f.lambda = f.tail_ ? std::max(0.0, f.tail_->growth_exponent()) : 0.0;
    f.growth_C = mlambda_norm(f, f.lambda);
    return f;
}

LocallyConstantFn LocallyConstantFn::constant(int p, int n, int ell, int M, double c) {
    LocallyConstantFn f(p, n, ell, M);
    std::fill(f.v_.begin(), f.v_.end(), c);
    f.set_tail(RadialTail::power(M, 0.0, c));
    f.lambda = 0.0;
    f.growth_C = std::abs(c);
    return f;
}

LocallyConstantFn LocallyConstantFn::indicator_ball(int p, int n, int ell, int M, int radius_exp) {
    if (radius_exp > M || radius_exp < ell) throw std::invalid_argument("ball radius outside grid levels");
    return from_radial(p, n, ell, M, [&](Shell s) { return (!s || *s <= radius_exp) ? 1.0 : 0.0; });
}

std::vector<std::size_t> LocallyConstantFn::cell_coords(std::size_t flat) const {
    std::vector<std::size_t> a(static_cast<std::size_t>(n_));
    for (int c = 0; c < n_; ++c) {
        a[static_cast<std::size_t>(c)] = flat % side_;
        flat /= side_;
    }
    return a;
}

Shell LocallyConstantFn::cell_shell(std::size_t flat) const {
    int best = std::numeric_limits<int>::min();
    for (int c = 0; c < n_; ++c) {
        const std::size_t a = flat % side_;
        flat /= side_;
        if (a == 0) continue;
        best = std::max(best, M_ - dual_valuation(a, p_));
    }
    if (best == std::numeric_limits<int>::min()) return std::nullopt;
    return best;
}

PAdicPoint LocallyConstantFn::cell_point(std::size_t flat, Window w) const {
    Window ww{std::min(w.lo, -M_), std::max(w.hi, -ell_)};
    std::vector<PAdicScalar> cs;
    for (auto a : cell_coords(flat)) {
        std::vector<int> d(static_cast<std::size_t>(ww.width()), 0);
        for (int i = 0; i < M_ - ell_; ++i) {
            d[static_cast<std::size_t>(-M_ + i - ww.lo)] = static_cast<int>(a % static_cast<std::size_t>(p_));
            a /= static_cast<std::size_t>(p_);
        }
        cs.push_back(PAdicScalar::from_digits(p_, ww, std::move(d)));
    }
    return PAdicPoint(std::move(cs));
}

std::size_t LocallyConstantFn::cell_of(const PAdicPoint& x) const {
    if (x.prime() != p_ || x.dim() != n_) throw std::invalid_argument("point on a different space");
    auto k = x.norm_exp();
    if (k && *k > M_) throw std::out_of_range("point outside B_M");
    std::size_t flat = 0, stride = 1;
    for (int c = 0; c < n_; ++c) {
        std::size_t a = 0, mul = 1;
        for (int i = 0; i < M_ - ell_; ++i, mul *= static_cast<std::size_t>(p_))
            a += static_cast<std::size_t>(x[c].digit(-M_ + i)) * mul;
        flat += a * stride;
        stride *= side_;
    }
    return flat;
}

double LocallyConstantFn::operator()(const PAdicPoint& x) const {
    auto k = x.norm_exp();
    if (k && *k > M_) return exterior(*k);
    return v_[cell_of(x)];
}

double LocallyConstantFn::interior_integral() const {
    double s = 0.0;
    for (double x : v_) s += x;
    return s * cell_volume();
}

double LocallyConstantFn::integral() const {
    double s = interior_integral();
    if (tail_) s += sum_product_vs(p_, n_, seq_of(*tail_), ones(), M_ + 1);
    return s;
}

LocallyConstantFn LocallyConstantFn::regrid(int ell, int M) const {
    if (ell > ell_ || M < M_) throw std::invalid_argument("regrid must refine and enlarge");
    LocallyConstantFn g(p_, n_, ell, M);
    const std::size_t lowq = ipow(static_cast<std::size_t>(p_), M - M_);
    const std::size_t keep = ipow(static_cast<std::size_t>(p_), M_ - ell_);
    for (std::size_t i = 0; i < g.v_.size(); ++i) {
        std::size_t rem = i, old = 0, stride = 1;
        bool outside = false;
        for (int c = 0; c < n_; ++c) {
            const std::size_t a = rem % g.side_;
            rem /= g.side_;
            if (a % lowq != 0) outside = true;
            old += ((a / lowq) % keep) * stride;
            stride *= side_;
        }
        g.v_[i] = outside ? exterior(*g.cell_shell(i)) : v_[old];
    }
    if (tail_) {
        RadialTail t;
        t.M = M;
        for (int k = M + 1; k <= tail_->table_end(); ++k) t.table.push_back(tail_->at(p_, k));
        t.powers = tail_->powers;
        g.tail_ = std::move(t);
    }
    g.lambda = lambda;
    g.growth_C = growth_C;
    return g;
}

std::vector<Piece> LocallyConstantFn::pieces() const {
    // min/max per level, same layout as the level sums
    const int D = digits();
    std::vector<std::vector<std::pair<double, double>>> lv(static_cast<std::size_t>(D + 1));
    lv[0].reserve(v_.size());
    for (double x : v_) lv[0].push_back({x, x});
    for (int r = 1; r <= D; ++r) {
        const std::size_t qb = ipow(static_cast<std::size_t>(p_), D - r + 1);
        const std::size_t q = qb / static_cast<std::size_t>(p_);
        std::vector<std::pair<double, double>> out(ipow(q, n_),
                                                   {std::numeric_limits<double>::infinity(),
                                                    -std::numeric_limits<double>::infinity()});
        const auto& in = lv[static_cast<std::size_t>(r - 1)];
        for (std::size_t i = 0; i < in.size(); ++i) {
            auto& o = out[reduce_index(i, qb, n_, q)];
            o.first = std::min(o.first, in[i].first);
            o.second = std::max(o.second, in[i].second);
        }
        lv[static_cast<std::size_t>(r)] = std::move(out);
    }
    std::vector<Piece> res;
    // walk down from B_M; node = (level r, prefix coords with M-r digits)
    struct Node {
        int r;
        std::vector<std::size_t> a;
    };
    std::vector<Node> stack{{M_, std::vector<std::size_t>(static_cast<std::size_t>(n_), 0)}};
    while (!stack.empty()) {
        Node nd = stack.back();
        stack.pop_back();
        const int depth = M_ - nd.r;
        const std::size_t q = ipow(static_cast<std::size_t>(p_), depth);
        std::size_t flat = 0, stride = 1;
        for (int c = 0; c < n_; ++c) {
            flat += nd.a[static_cast<std::size_t>(c)] * stride;
            stride *= q;
        }
        const auto mm = lv[static_cast<std::size_t>(nd.r - ell_)][flat];
        if (mm.first == mm.second) {
            if (mm.first != 0.0) {
                std::vector<PAdicScalar> cs;
                Window ww{std::min(-M_, -16), std::max(-ell_, 15)};
                for (int c = 0; c < n_; ++c) {
                    std::vector<int> d(static_cast<std::size_t>(ww.width()), 0);
                    std::size_t a = nd.a[static_cast<std::size_t>(c)];
                    for (int i = 0; i < depth; ++i) {
                        d[static_cast<std::size_t>(-M_ + i - ww.lo)] = static_cast<int>(a % static_cast<std::size_t>(p_));
                        a /= static_cast<std::size_t>(p_);
                    }
                    cs.push_back(PAdicScalar::from_digits(p_, ww, std::move(d)));
                }
                res.push_back({Ball{PAdicPoint(std::move(cs)), nd.r}, mm.first});
            }
            continue;
        }
        const std::size_t kids = ipow(static_cast<std::size_t>(p_), n_);
        for (std::size_t t = 0; t < kids; ++t) {
            Node ch{nd.r - 1, nd.a};
            std::size_t rem = t;
            for (int c = 0; c < n_; ++c) {
                ch.a[static_cast<std::size_t>(c)] += (rem % static_cast<std::size_t>(p_)) * q;
                rem /= static_cast<std::size_t>(p_);
            }
            stack.push_back(std::move(ch));
        }
    }
    return res;
}

bool LocallyConstantFn::same_grid(const LocallyConstantFn& o) const {
    return p_ == o.p_ && n_ == o.n_ && ell_ == o.ell_ && M_ == o.M_;
}

LocallyConstantFn& LocallyConstantFn::operator+=(const LocallyConstantFn& o) {
    if (!same_grid(o)) throw std::invalid_argument("adding functions on different grids");
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    if (o.tail_) {
        if (!tail_) {
            tail_ = o.tail_;
        } else {
            RadialTail t;
            t.M = M_;
            const int end = std::max(tail_->table_end(), o.tail_->table_end());
            for (int k = M_ + 1; k <= end; ++k) t.table.push_back(tail_->at(p_, k) + o.tail_->at(p_, k));
            t.powers = tail_->powers;
            for (const auto& pw : o.tail_->powers) {
                auto it = std::find_if(t.powers.begin(), t.powers.end(), [&](const PowerTail& x) { return x.s == pw.s; });
                if (it != t.powers.end()) it->c += pw.c;
                else t.powers.push_back(pw);
            }
            tail_ = std::move(t);
        }
    }
    lambda = std::max(lambda, o.lambda);
    growth_C += o.growth_C;
    return *this;
}

LocallyConstantFn& LocallyConstantFn::operator*=(double a) {
    for (double& x : v_) x *= a;
    if (tail_) {
        for (double& x : tail_->table) x *= a;
        for (auto& pw : tail_->powers) pw.c *= a;
    }
    growth_C *= std::abs(a);
    return *this;
}

LocallyConstantFn operator-(LocallyConstantFn a, const LocallyConstantFn& b) {
    LocallyConstantFn nb = b;
    nb *= -1.0;
    return a += nb;
}

double shell_weight(const RadialProfile& w, int k) {
    const int p = w.prime();
    const int n = w.dim();
    const double shell = 1.0 - ppow(p, -n);
    if (k < w.m_lo()) return shell * ppow(p, k * (n - w.lower().s)) / w.lower().c;
    if (k > w.m_hi()) return shell * ppow(p, k * (n - w.upper().s)) / w.upper().c;
    return shell * ppow(p, double(k) * n) / w(k);
}

double outer_w_mass(const RadialProfile& w, int M) {
    return sum_product_vs(w.prime(), w.dim(), ones(), inverse_w(w, M + 1), M + 1);
}

LocallyConstantFn apply_W_direct(const RadialProfile& w, const LocallyConstantFn& f, const FunctionSpaceConfig& cfg) {
    if (w.prime() != f.prime() || w.dim() != f.dim()) throw std::invalid_argument("kernel on a different space");
    check_growth(w, f);
    const int p = f.prime();
    const int n = f.dim();
    const int ell = f.ell();
    const int M = f.M();
    const int D = f.digits();
    const auto lv = ball_sums(f);
    const ShellSeq T = f.tail() ? seq_of(*f.tail()) : ShellSeq{M + 1, {}, {}};
    const double ts = f.tail() ? sum_product_vs(p, n, T, inverse_w(w, M + 1), M + 1) : 0.0;
    const double cout = outer_w_mass(w, M);
    std::vector<double> invw(static_cast<std::size_t>(D + 1)), sw(static_cast<std::size_t>(D + 1));
    std::vector<std::size_t> qs(static_cast<std::size_t>(D + 1));
    for (int r = 0; r <= D; ++r) {
        invw[static_cast<std::size_t>(r)] = 1.0 / w(ell + r);
        sw[static_cast<std::size_t>(r)] = shell_weight(w, ell + r);
        qs[static_cast<std::size_t>(r)] = ipow(static_cast<std::size_t>(p), D - r);
    }
    LocallyConstantFn out(p, n, ell, M);
    for (std::size_t i = 0; i < f.cells(); ++i) {
        const double fx = f[i];
        double acc = 0.0;
        double prev = lv[0][i];
        for (int r = 1; r <= D; ++r) {
            const double Ik = lv[static_cast<std::size_t>(r)][reduce_index(i, f.side(), n, qs[static_cast<std::size_t>(r)])];
            acc += (Ik - prev) * invw[static_cast<std::size_t>(r)] - fx * sw[static_cast<std::size_t>(r)];
            prev = Ik;
        }
        out[i] = acc + ts - fx * cout;
    }
    out.set_tail(finish_tail(p, M, w_exterior(w, f, cfg.ext_shells)));
    return finish(std::move(out), f.lambda);
}

LocallyConstantFn apply_W_fourier(const RadialProfile& w, const std::function<double(int)>& symbol,
                                  const LocallyConstantFn& f, const FunctionSpaceConfig& cfg) {
    if (w.prime() != f.prime() || w.dim() != f.dim()) throw std::invalid_argument("kernel on a different space");
    check_growth(w, f);
    check_budget(f, cfg);
    const int p = f.prime();
    const int n = f.dim();
    const int ell = f.ell();
    const int M = f.M();
    const double pn = ppow(p, -n);
    // mean of A over B_{-M}
    double zero_mult = 0.0;
    {
        double wgt = 1.0 - pn;
        for (int j = 0; j < 400; ++j, wgt *= pn) {
            const double term = symbol(-M - j) * wgt;
            zero_mult += term;
            if (j > 4 && term < 1e-20 * zero_mult) break;
        }
    }
    std::vector<std::complex<double>> data(f.values().begin(), f.values().end());
    fft_nd(data, f.side(), n, false);
    std::vector<int> val(f.side());
    for (std::size_t b = 0; b < f.side(); ++b) val[b] = dual_valuation(b, p);
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::size_t rem = i;
        int vmin = std::numeric_limits<int>::max();
        for (int c = 0; c < n; ++c) {
            const std::size_t b = rem % f.side();
            rem /= f.side();
            if (b != 0) vmin = std::min(vmin, val[b]);
        }
        const double mult = vmin == std::numeric_limits<int>::max() ? zero_mult : symbol(-ell - vmin);
        data[i] *= -mult;
    }
    fft_nd(data, f.side(), n, true);
    const double ts = f.tail() ? sum_product_vs(p, n, seq_of(*f.tail()), inverse_w(w, M + 1), M + 1) : 0.0;
    LocallyConstantFn out(p, n, ell, M);
    for (std::size_t i = 0; i < data.size(); ++i) out[i] = data[i].real() + ts;

    std::vector<double> ext;
    if (f.tail()) {
        ext = w_exterior(w, f, cfg.ext_shells);
    } else {
        // only the zero coset reaches outside B_M: -∫f · F^{-1}[A 1_{B_{-M}}]
        const int lo = std::min(-M, -w.m_hi()) - 8;
        std::vector<double> tab;
        for (int m = lo; m <= -M; ++m) tab.push_back(symbol(m));
        const double sA = w.upper().s - n;
        RadialProfile Ab(p, n, lo, std::move(tab), {sA, symbol(lo) / ppow(p, lo * sA)}, {0.0, 0.0});
        const double mass = f.interior_integral();
        for (int b = M + 1; b <= M + cfg.ext_shells; ++b) ext.push_back(-mass * radial_inverse_fourier(Ab, b).value);
    }
    out.set_tail(finish_tail(p, M, std::move(ext)));
    return finish(std::move(out), f.lambda);
}

LocallyConstantFn apply_W_fourier(const RadialProfile& w, const LocallyConstantFn& f, const FunctionSpaceConfig& cfg) {
    return apply_W_fourier(w, [&](int m) { return compute_symbol(w, m).value; }, f, cfg);
}

namespace {

// Exterior of F * G where F is radial outside B_M with values F(k), ball
// integrals IF(k) = ∫_{B_k} F, and G is a grid function with radial tail.
std::vector<double> conv_exterior(int p, int n, const ShellSeq& F, const std::function<double(int)>& IF,
                                  const LocallyConstantFn& g, int K) {
    const int M = g.M();
    const ShellSeq G = g.tail() ? seq_of(*g.tail()) : ShellSeq{M + 1, {}, {}};
    const double shell = 1.0 - ppow(p, -n);
    std::vector<double> out;
    double Ig = g.interior_integral();  // ∫_{B_{b-1}} g
    for (int b = M + 1; b <= M + K; ++b) {
        const double Fb = F.at(p, b);
        const double Gb = G.at(p, b);
        const double far = (g.tail() ? sum_product_vs(p, n, F, G, b + 1) : 0.0);
        out.push_back(Fb * Ig + Gb * (IF(b) - Fb * ppow(p, double(b - 1) * n)) + far);
        Ig += Gb * ppow(p, double(b) * n) * shell;
    }
    return out;
}

}  // namespace

LocallyConstantFn convolve(const LocallyConstantFn& f0, const LocallyConstantFn& g0, const FunctionSpaceConfig& cfg) {
    if (f0.prime() != g0.prime() || f0.dim() != g0.dim()) throw std::invalid_argument("convolving across spaces");
    const int ell = std::min(f0.ell(), g0.ell());
    const int M = std::max(f0.M(), g0.M());
    const LocallyConstantFn f = f0.regrid(ell, M);
    const LocallyConstantFn g = g0.regrid(ell, M);
    check_budget(f, cfg);
    const int p = f.prime();
    const int n = f.dim();
    std::vector<std::complex<double>> a(f.values().begin(), f.values().end());
    std::vector<std::complex<double>> b(g.values().begin(), g.values().end());
    fft_nd(a, f.side(), n, false);
    fft_nd(b, g.side(), n, false);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
    fft_nd(a, f.side(), n, true);
    const double vol = f.cell_volume();
    const ShellSeq F = f.tail() ? seq_of(*f.tail()) : ShellSeq{M + 1, {}, {}};
    const ShellSeq G = g.tail() ? seq_of(*g.tail()) : ShellSeq{M + 1, {}, {}};
    const double both = (f.tail() && g.tail()) ? sum_product_vs(p, n, F, G, M + 1) : 0.0;
    LocallyConstantFn out(p, n, ell, M);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i].real() * vol + both;
    if (f.tail() || g.tail()) {
        // ∫_{B_k} f for k > M
        const double If = f.interior_integral();
        const double shell = 1.0 - ppow(p, -n);
        auto IF = [&](int k) {
            double s = If;
            for (int j = M + 1; j <= k; ++j) s += F.at(p, j) * ppow(p, double(j) * n) * shell;
            return s;
        };
        std::vector<double> ext;
        if (f.tail()) {
            ext = conv_exterior(p, n, F, IF, g, cfg.ext_shells);
        } else {
            // roles swapped: the tail side acts as the radial factor
            const double Ig = g.interior_integral();
            auto IG = [&](int k) {
                double s = Ig;
                for (int j = M + 1; j <= k; ++j) s += G.at(p, j) * ppow(p, double(j) * n) * shell;
                return s;
            };
            ext = conv_exterior(p, n, G, IG, f, cfg.ext_shells);
        }
        out.set_tail(finish_tail(p, M, std::move(ext)));
    } else {
        out.set_tail(std::nullopt);
    }
    // exterior is zero only when both are compact; otherwise the table above applies
    return finish(std::move(out), std::max(f.lambda, g.lambda));
}

namespace {

ShellSeq heat_seq(const HeatKernel& hk, double s, int M, int len) {
    ShellSeq z;
    z.lo = M + 1;
    for (int k = M + 1; k <= M + len; ++k) z.table.push_back(hk.z_s(Shell{k}, s).value);
    const int K = M + len;
    z.powers.push_back(fit_tail(hk.prime(), K - 1, z.table[z.table.size() - 2], K, z.table.back()));
    return z;
}

LocallyConstantFn heat_finish(const HeatKernel& hk, double s, const LocallyConstantFn& f, LocallyConstantFn out,
                              const FunctionSpaceConfig& cfg) {
    const int p = f.prime();
    const int n = f.dim();
    const int M = f.M();
    const ShellSeq Z = heat_seq(hk, s, M, cfg.ext_shells + 120);
    if (f.tail()) {
        const double c = sum_product_vs(p, n, Z, seq_of(*f.tail()), M + 1);
        for (double& x : out.values()) x += c;
    }
    auto IZ = [&](int k) { return hk.ball_mass_s(k, s).inside; };
    out.set_tail(finish_tail(p, M, conv_exterior(p, n, Z, IZ, f, cfg.ext_shells)));
    return finish(std::move(out), f.lambda);
}

}  // namespace

LocallyConstantFn convolve_heat(const HeatKernel& hk, double s, const LocallyConstantFn& f,
                                const FunctionSpaceConfig& cfg) {
    if (hk.prime() != f.prime() || hk.dim() != f.dim()) throw std::invalid_argument("kernel on a different space");
    if (s < 0.0) throw std::domain_error("heat convolution needs t >= 0");
    if (s == 0.0) return f;
    check_budget(f, cfg);
    const int p = f.prime();
    const int n = f.dim();
    const int ell = f.ell();
    std::vector<std::complex<double>> data(f.values().begin(), f.values().end());
    fft_nd(data, f.side(), n, false);
    std::vector<int> val(f.side());
    for (std::size_t b = 0; b < f.side(); ++b) val[b] = dual_valuation(b, p);
    const double zero_mult = hk.ball_mass_s(f.M(), s).inside;
    std::vector<double> mult_by_v(static_cast<std::size_t>(f.digits() + 1));
    for (int v = 0; v <= f.digits(); ++v) mult_by_v[static_cast<std::size_t>(v)] = std::exp(-s * hk.symbol(-ell - v));
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::size_t rem = i;
        int vmin = std::numeric_limits<int>::max();
        for (int c = 0; c < n; ++c) {
            const std::size_t b = rem % f.side();
            rem /= f.side();
            if (b != 0) vmin = std::min(vmin, val[b]);
        }
        data[i] *= vmin == std::numeric_limits<int>::max() ? zero_mult : mult_by_v[static_cast<std::size_t>(vmin)];
    }
    fft_nd(data, f.side(), n, true);
    LocallyConstantFn out(p, n, ell, f.M());
    for (std::size_t i = 0; i < data.size(); ++i) out[i] = data[i].real();
    return heat_finish(hk, s, f, std::move(out), cfg);
}

LocallyConstantFn convolve_heat_direct(const HeatKernel& hk, double s, const LocallyConstantFn& f,
                                       const FunctionSpaceConfig& cfg) {
    if (!(s > 0.0)) throw std::domain_error("heat convolution needs t > 0");
    const int p = f.prime();
    const int n = f.dim();
    const std::size_t N = f.cells();
    // kernel mass per cell of B_M / B_ell
    std::vector<double> km(N);
    const double vol = f.cell_volume();
    for (std::size_t i = 0; i < N; ++i) {
        Shell sh = f.cell_shell(i);
        km[i] = sh ? hk.z_s(sh, s).value * vol : hk.ball_mass_s(f.ell(), s).inside;
    }
    LocallyConstantFn out(p, n, f.ell(), f.M());
    for (std::size_t x = 0; x < N; ++x) {
        double acc = 0.0;
        for (std::size_t y = 0; y < N; ++y) {
            // cell of x - y, coordinatewise mod side
            std::size_t rx = x, ry = y, d = 0, stride = 1;
            for (int c = 0; c < n; ++c) {
                const std::size_t ax = rx % f.side(), ay = ry % f.side();
                rx /= f.side();
                ry /= f.side();
                d += ((ax + f.side() - ay) % f.side()) * stride;
                stride *= f.side();
            }
            acc += km[d] * f[y];
        }
        out[x] = acc;
    }
    return heat_finish(hk, s, f, std::move(out), cfg);
}

double mlambda_norm(const LocallyConstantFn& f, double lambda) {
    const int p = f.prime();
    double best = 0.0;
    for (std::size_t i = 0; i < f.cells(); ++i) {
        Shell sh = f.cell_shell(i);
        const double den = sh ? 1.0 + ppow(p, *sh * lambda) : 1.0;
        best = std::max(best, std::abs(f[i]) / den);
    }
    if (f.tail()) {
        const RadialTail& t = *f.tail();
        if (t.growth_exponent() > lambda + 1e-12) return std::numeric_limits<double>::infinity();
        const int end = t.table_end() + 200;
        for (int k = f.M() + 1; k <= end; ++k) best = std::max(best, std::abs(t.at(p, k)) / (1.0 + ppow(p, k * lambda)));
        double lim = 0.0;
        for (const auto& pw : t.powers)
            if (pw.c != 0.0 && std::abs(pw.s - lambda) <= 1e-12) lim += pw.c;
        best = std::max(best, std::abs(lim));
    }
    return best;
}

double mlambda_norm(const std::vector<LocallyConstantFn>& f_t, double lambda) {
    double best = 0.0;
    for (const auto& f : f_t) best = std::max(best, mlambda_norm(f, lambda));
    return best;
}

double psi_core_value(int p, int n, int L, double gamma) {
    return (1.0 - ppow(p, -n)) * ppow(p, -L * gamma) / (1.0 - ppow(p, -gamma - n));
}

LocallyConstantFn build_psi(int p, int n, int L, double gamma, int M) {
    if (!(gamma > 0.0)) throw std::domain_error("comparison function needs gamma > 0");
    if (M < -L) throw std::invalid_argument("grid must contain B_{-L}");
    const double core = psi_core_value(p, n, L, gamma);
    auto f = LocallyConstantFn::from_radial(
        p, n, -L, M, [&](Shell s) { return s ? ppow(p, *s * gamma) : core; }, RadialTail::power(M, gamma, 1.0));
    f.lambda = gamma;
    f.growth_C = std::max(1.0, core);
    return f;
}

void fft_nd(std::vector<std::complex<double>>& data, std::size_t side, int n, bool inverse) {
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> in(side), out(side);
    std::size_t stride = 1;
    for (int c = 0; c < n; ++c) {
        const std::size_t block = stride * side;
        for (std::size_t base = 0; base < data.size(); base += block)
            for (std::size_t off = 0; off < stride; ++off) {
                for (std::size_t k = 0; k < side; ++k) in[k] = data[base + off + k * stride];
                if (inverse) fft.inv(out, in);
                else fft.fwd(out, in);
                for (std::size_t k = 0; k < side; ++k) data[base + off + k * stride] = out[k];
            }
        stride *= side;
    }
}

int dual_valuation(std::size_t b, int p) {
    if (b == 0) return -1;
    int v = 0;
    while (b % static_cast<std::size_t>(p) == 0) {
        b /= static_cast<std::size_t>(p);
        ++v;
    }
    return v;
}

}  // namespace padic
