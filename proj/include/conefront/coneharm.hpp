#pragma once

#include "conefront/core.hpp"
#include "conefront/fields.hpp"
#include "conefront/weights.hpp"

#include <nlohmann/json_fwd.hpp>

namespace conefront {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Open cone sector in frequency space. d=1: the two half-lines. d=2: an
/// angular arc, half-open on both ends so the base sectors tile R^2 \ 0.
struct Sector {
    int d = 1;
    int index = 0;
    bool full = false;        // whole frequency space minus 0
    int sign = +1;            // d=1
    double center = 0.0;      // d=2 arc center angle
    double half_width = 0.0;  // d=2 arc half width
    int tile_n = 0;           // > 0: exact base tile of a 2pi/n partition

    bool contains(const Pt& xi) const;
};

struct ConePartition {
    int d = 1;
    int n_sectors = 2;
    double lambda = 1.0;

    Sector base(int j) const;
    Sector widened(int j) const;
    static Sector everything(int d);
};

ConePartition make_cone_partition(int d, int n_sectors, double lambda = 1.0);

/// Per-dyadic-annulus seminorm values S_k over A_k = {2^k <= |xi| < 2^{k+1}},
/// with a least-squares decay slope over the top fit_width annuli (the
/// outermost usable annulus is excluded as an aliasing guard).
struct DyadicProfile {
    int k_min = 0;
    int k_max = -1;
    std::vector<double> S;  // NaN marks an empty annulus-cone intersection
    double q = 1.0;
    int fit_width = 4;
    int fit_k_lo = 0, fit_k_hi = -1;  // annuli actually entering the slope fit
    std::optional<double> slope;
    int sector_index = -1;
    std::string weight_id;

    double value(int k) const { return S[static_cast<size_t>(k - k_min)]; }
    /// Largest annulus value inside the fitted window (significance scale).
    double fit_window_max() const;
    nlohmann::json to_json(double tau_finite = 0.1, double tau_inf = 0.05) const;
};

/// Slope verdict: regular means the cone seminorm is judged finite.
bool profile_regular(const DyadicProfile& p, double tau_finite = 0.1, double tau_inf = 0.05);

DyadicProfile cone_seminorm_profile(const Spectrum& F, const Sector& sector, const WeightSpec& w,
                                    double q, const Pt& x0, int fit_width = 4, int skip_outer = 1);

double full_seminorm(const DyadicProfile& p);

/// Short-time Fourier transform samples V_phi f(x_m, xi_n) on the lattice
/// (a, b) = (astep*h, bstep*dxi).
struct GaborCoefficients {
    Grid grid;
    WindowSpec window;
    Index astep = 1, bstep = 1;
    std::array<Index, 2> npos{1, 1};
    std::array<Index, 2> nxi{1, 1};
    std::vector<Pt> positions;
    ArrayXc coeffs;  // positions-major, frequency-minor, both row-major
    bool warning_coarse = false;

    Index n_positions() const { return static_cast<Index>(positions.size()); }
    Index n_freqs() const { return grid.dim == 1 ? nxi[0] : nxi[0] * nxi[1]; }
    Pt freq_at(Index sub) const;
    double x_measure() const;
    double xi_measure() const;
    Complex at(Index pos, Index sub) const { return coeffs[pos * n_freqs() + sub]; }
};

GaborCoefficients stft(const SampledField& f, const WindowSpec& w, Index astep, Index bstep = 1);

enum class ModFlavor { M, W };

DyadicProfile mod_seminorm_profile(const GaborCoefficients& G, const Sector& sector,
                                   const WeightSpec& w, double p, double q, ModFlavor flavor,
                                   int fit_width = 4, int skip_outer = 1);

}  // namespace conefront
