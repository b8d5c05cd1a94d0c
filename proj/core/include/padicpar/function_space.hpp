#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "padicpar/heat_kernel.hpp"
#include "padicpar/padic.hpp"
#include "padicpar/radial.hpp"

namespace padic {

/// Radial values on ‖x‖ = p^k for k > M: a table for shells M+1.., then a sum
/// of powers c_i p^{k s_i}.
struct RadialTail {
    int M = 0;
    std::vector<double> table;
    std::vector<PowerTail> powers;

    double at(int p, int k) const;
    int table_end() const { return M + static_cast<int>(table.size()); }
    /// Pure power tail c ‖x‖^s outside B_M.
    static RadialTail power(int M, double s, double c);
    /// Largest exponent with a nonzero coefficient (-inf if none).
    double growth_exponent() const;
};

struct Piece {
    Ball ball;
    double coeff = 0.0;
};

/// Function on Q_p^n that is constant on the cells of B_M / B_ell and radial
/// outside B_M. Cells are indexed per coordinate by the digits at positions
/// -M .. -ell-1, least significant first; the flat index is sum_c a_c N^c.
class LocallyConstantFn {
public:
    LocallyConstantFn(int p, int n, int ell, int M);

    /// Nested or overlapping pieces add up; the result is split onto the cell grid.
    static LocallyConstantFn from_pieces(int p, int n, int ell, int M, const std::vector<Piece>& pieces,
                                         std::optional<RadialTail> tail = std::nullopt);
    /// Radial function sampled per shell (nullopt = the cell at the origin).
    static LocallyConstantFn from_radial(int p, int n, int ell, int M, const std::function<double(Shell)>& f,
                                         std::optional<RadialTail> tail = std::nullopt);
    static LocallyConstantFn constant(int p, int n, int ell, int M, double c);
    static LocallyConstantFn indicator_ball(int p, int n, int ell, int M, int radius_exp);

    int prime() const { return p_; }
    int dim() const { return n_; }
    int ell() const { return ell_; }
    int M() const { return M_; }
    int digits() const { return M_ - ell_; }
    std::size_t side() const { return side_; }
    std::size_t cells() const { return v_.size(); }
    double cell_volume() const;

    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }
    double& operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }

    const std::optional<RadialTail>& tail() const { return tail_; }
    void set_tail(std::optional<RadialTail> t);
    /// Value on the shell k > M (zero without a tail).
    double exterior(int k) const;

    double operator()(const PAdicPoint& x) const;
    std::size_t cell_of(const PAdicPoint& x) const;
    std::vector<std::size_t> cell_coords(std::size_t flat) const;
    /// Shell of the points of a cell; nullopt for the cell B_ell at the origin.
    Shell cell_shell(std::size_t flat) const;
    /// A representative point of a cell.
    PAdicPoint cell_point(std::size_t flat, Window w = {}) const;

    /// ∫ over B_M.
    double interior_integral() const;
    /// ∫ over Q_p^n (requires a summable tail).
    double integral() const;

    /// Same function on a grid with ell' <= ell and M' >= M.
    LocallyConstantFn regrid(int ell, int M) const;

    /// Minimal disjoint ball decomposition of the interior (merges equal siblings).
    std::vector<Piece> pieces() const;

    /// Growth data: lambda and C with |f| <= C (1 + ‖x‖^lambda).
    double lambda = 0.0;
    double growth_C = 0.0;

    LocallyConstantFn& operator+=(const LocallyConstantFn& o);
    LocallyConstantFn& operator*=(double a);
    friend LocallyConstantFn operator+(LocallyConstantFn a, const LocallyConstantFn& b) { return a += b; }
    friend LocallyConstantFn operator-(LocallyConstantFn a, const LocallyConstantFn& b);
    friend LocallyConstantFn operator*(double a, LocallyConstantFn f) { return f *= a; }

    bool same_grid(const LocallyConstantFn& o) const;

private:
    int p_;
    int n_;
    int ell_;
    int M_;
    std::size_t side_;
    std::vector<double> v_;
    std::optional<RadialTail> tail_;
};

struct FunctionSpaceConfig {
    std::size_t max_cells = std::size_t{1} << 20;
    int ext_shells = 48;  // exterior shells tabulated in outputs
};

/// p^{kn}(1 - p^{-n}) / w(p^k), safe for large |k|.
double shell_weight(const RadialProfile& w, int k);

/// sum_{k > M} vs(k) / w(p^k): the mean of A_w over B_{-M}.
double outer_w_mass(const RadialProfile& w, int M);

/// (W_w f) by the difference integral with exact ball sums.
LocallyConstantFn apply_W_direct(const RadialProfile& w, const LocallyConstantFn& f,
                                 const FunctionSpaceConfig& cfg = {});

/// -F^{-1}[A_w F f] on the quotient group; `symbol(m)` is A_w(p^m).
LocallyConstantFn apply_W_fourier(const RadialProfile& w, const std::function<double(int)>& symbol,
                                  const LocallyConstantFn& f, const FunctionSpaceConfig& cfg = {});
/// Convenience: symbol from compute_symbol.
LocallyConstantFn apply_W_fourier(const RadialProfile& w, const LocallyConstantFn& f,
                                  const FunctionSpaceConfig& cfg = {});

/// f * g with Haar measure normalised by vol(B_0) = 1.
LocallyConstantFn convolve(const LocallyConstantFn& f, const LocallyConstantFn& g,
                           const FunctionSpaceConfig& cfg = {});

/// Z_s * f for the heat kernel at s = kappa t.
LocallyConstantFn convolve_heat(const HeatKernel& hk, double s, const LocallyConstantFn& f,
                                const FunctionSpaceConfig& cfg = {});

/// Same as convolve_heat but by direct cell sums; quadratic cost, test use.
LocallyConstantFn convolve_heat_direct(const HeatKernel& hk, double s, const LocallyConstantFn& f,
                                       const FunctionSpaceConfig& cfg = {});

/// sup_x |f| / (1 + ‖x‖^lambda); +infinity when the tail grows faster.
double mlambda_norm(const LocallyConstantFn& f, double lambda);
double mlambda_norm(const std::vector<LocallyConstantFn>& f_t, double lambda);

/// psi = ‖x‖^gamma averaged over B_{-L}: the comparison function.
LocallyConstantFn build_psi(int p, int n, int L, double gamma, int M);
/// Constant value of psi on B_{-L}.
double psi_core_value(int p, int n, int L, double gamma);

/// Discrete transform helpers over (Z/N)^n, flat index sum_c a_c N^c.
void fft_nd(std::vector<std::complex<double>>& data, std::size_t side, int n, bool inverse);

/// ord_p of the dual index b; -1 for b = 0.
int dual_valuation(std::size_t b, int p);

}  // namespace padic
