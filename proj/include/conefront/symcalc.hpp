#pragma once

#include "conefront/coneharm.hpp"
#include "conefront/core.hpp"
#include "conefront/weights.hpp"

#include <nlohmann/json_fwd.hpp>

#include <memory>

namespace conefront {

/// Sampling layout for array symbols and symbol-level calculus: x runs over
/// the field grid (or the single point 0 for x-independent data) and xi over
/// the field grid's centered frequencies.
struct SymbolGrid {
    Grid field;
    bool with_x = false;

    Index n_x() const { return with_x ? field.size() : 1; }
    Index n_xi() const { return field.size(); }
    Pt x_point(Index i) const { return with_x ? field.point(i) : Pt::Zero(); }
    Pt xi_point(Index i) const { return field.freq_point(i); }
    std::array<Index, 4> tensor_shape() const;
};

/// Dense samples a(x_i, xi_j), x-major.
struct SymbolSamples {
    SymbolGrid grid;
    ArrayXc v;

    Complex at(Index ix, Index ixi) const { return v[ix * grid.n_xi() + ixi]; }
};

/// Evaluable symbol a(x, xi) with declared weight omega0 and orders (rho, delta).
struct SymbolSpec {
    enum class Kind { Multiplier, XMultiplier, Heat, Directional, Phase, Array, Callable };

    int d = 1;
    Kind kind = Kind::Multiplier;
    std::string id;
    bool x_independent = true;
    bool xi_independent = false;
    WeightSpec omega0;
    double rho = 1.0;
    double delta = 0.0;

    std::function<Complex(const Pt&, const Pt&)> fn;
    /// Optional closed-form partial derivative d_x^alpha d_xi^beta a.
    std::function<Complex(const std::array<int, 2>&, const std::array<int, 2>&, const Pt&, const Pt&)>
        partial_fn;
    std::shared_ptr<SymbolSamples> samples;  // Kind::Array payload

    // presets
    static SymbolSpec multiplier_bracket(double s, int d = 1);
    /// m(x) = c0 + c1 * cos(k * x1) (periodic on grids whose box length is a
    /// multiple of 2*pi/k), times <xi>^s.
    static SymbolSpec modulated_bracket(double c0, double c1, double k, double s, int d = 1);
    static SymbolSpec xmultiplier_cos(double c0, double c1, double k, int d = 1);
    static SymbolSpec heat_symbol();
    /// d=2: s-order multiplier vanishing on the cone around theta0 (inner half
    /// width) and equal to <xi>^s outside the outer half width; d=1: vanishing
    /// on one half-line (theta0 = 0 keeps xi > 0, theta0 = pi keeps xi < 0).
    static SymbolSpec directional(double s, double theta0, double hw_inner, double hw_outer, int d);
    static SymbolSpec phase(const Pt& x0, int d = 1);
    static SymbolSpec from_callable(std::string id, int d,
                                    std::function<Complex(const Pt&, const Pt&)> fn,
                                    bool x_indep, bool xi_indep);
    static SymbolSpec from_samples(SymbolSamples samples, std::string id = "array");

    /// Multiply by a radial band-edge roll-off (1 below start_frac * nyq,
    /// exactly 0 at nyq). A symbol sampled on a periodic frequency grid with
    /// any xi-dependence left at the Nyquist wrap has a kink there whose
    /// inverse transform rings globally; rolling off to zero inside the
    /// outermost dyadic annulus (which slope fits skip anyway) removes the
    /// kink while keeping the symbol elliptic on the probed band.
    SymbolSpec with_band_taper(double nyq, double start_frac = 0.85) const;

    Complex eval(const Pt& x, const Pt& xi) const;
    /// Partial derivative: closed form if provided, spectral differentiation
    /// for arrays, centered finite differences otherwise.
    SymbolSamples partial_samples(const std::array<int, 2>& alpha, const std::array<int, 2>& beta,
                                  const SymbolGrid& sg) const;
    SymbolSamples sample(const SymbolGrid& sg) const;

    static SymbolSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

Complex eval_symbol(const SymbolSpec& a, const Pt& x, const Pt& xi);

ClassReport check_symbol_class(const SymbolSpec& a, const WeightSpec& omega0, double rho,
                               double delta, int max_order, const LatticeSpec& lattice);

/// min over x in the probe set and R <= |xi| <= 0.9 * xi_max of |a| / omega0.
double ellipticity_margin(const SymbolSpec& a, const WeightSpec& omega0,
                          const std::vector<Pt>& x_probe, double R, double xi_max,
                          int n_radial = 48, int n_angular = 32);

struct CharParams {
    double x_radius = 1.0;
    double R = 8.0;
    std::optional<double> c_min;  // default: 1e-3 * median probe ratio
    double xi_max = 64.0;
    int n_radial = 48;
    int n_angular_per_sector = 8;
    int n_x = 5;
};

struct CharEntry {
    Pt x = Pt::Zero();
    int sector = 0;
    double margin = 0.0;
    bool characteristic = false;
};

struct CharSetEstimate {
    double c_min = 0.0;
    CharParams params;
    int n_sectors = 0;
    std::vector<CharEntry> entries;  // centers-major, sector-minor

    bool empty_char() const;
    std::vector<std::pair<Index, int>> characteristic_pairs() const;
    nlohmann::json to_json() const;
};

CharSetEstimate char_set(const SymbolSpec& a, const WeightSpec& omega0, const ConePartition& cones,
                         const std::vector<Pt>& centers, const CharParams& params);

/// Truncated Kohn-Nirenberg product
///   (a # b)_N = sum_{|alpha| <= N} (-i)^{|alpha|}/alpha! d_xi^alpha a * d_x^alpha b,
/// sampled on sg.
SymbolSpec compose_symbols(const SymbolSpec& a, const SymbolSpec& b, int N, const SymbolGrid& sg);

/// Cone region (X, Gamma, R): X is the whole grid box, Gamma a sector (or the
/// full space) and R the low-frequency cutoff.
struct ConeRegion {
    Sector sector;
    double R = 1.0;
};

struct ResidualRow {
    int j = 0;
    std::vector<int> ks;
    std::vector<double> sup;      // per-annulus sup of |h_j| <xi>^{j*mu}
    std::vector<double> raw_sup;  // per-annulus sup of |h_j| alone
    double raw_max = 0.0;
    std::optional<double> slope;  // unset when the residual vanishes numerically

    bool decays(double tau = 0.1) const { return !slope.has_value() || *slope <= tau; }
};

struct ParametrixResult {
    int order = 0;
    double mu = 0.0;
    std::vector<SymbolSpec> b;  // b_1..b_j
    std::vector<SymbolSpec> h;  // h_1..h_j
    std::vector<ResidualRow> residuals;
};

ParametrixResult parametrix(const SymbolSpec& a, const WeightSpec& omega0, double rho,
                            const ConeRegion& region, int j_max, int N, const SymbolGrid& sg,
                            std::optional<double> c_min = std::nullopt);

}  // namespace conefront
