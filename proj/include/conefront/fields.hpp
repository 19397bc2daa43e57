#pragma once

#include "conefront/core.hpp"

#include <nlohmann/json_fwd.hpp>

namespace conefront {

/// Complex field sampled on a uniform periodic grid.
struct SampledField {
    Grid grid;
    ArrayXc values;

    void validate() const;
    double sup_norm() const { return values.abs().maxCoeff(); }
    double l2_mass() const { return grid.cell_volume() * values.abs2().sum(); }
};

/// Fourier side of a field: same grid metadata, centered frequencies.
struct Spectrum {
    Grid grid;  // spatial grid the spectrum belongs to
    ArrayXc values;

    double freq_spacing(int axis) const { return grid.freq_spacing(axis); }
    double l2_mass() const { return grid.freq_cell_volume() * values.abs2().sum(); }
};

Spectrum dft(const SampledField& f);
SampledField idft(const Spectrum& F);

/// Localization windows. gaussian(sigma) is Schwartz; raised_cosine(r) and
/// smooth_bump(r) are exactly 0 outside radius r and 1 for |u| <= r/2.
/// smooth_bump uses a C-infinity taper, raised_cosine the usual cos^2 one.
struct WindowSpec {
    enum class Kind { Gaussian, RaisedCosine, SmoothBump };
    Kind kind = Kind::RaisedCosine;
    double param = 1.0;  // sigma for gaussian, radius otherwise

    static WindowSpec gaussian(double sigma) { return {Kind::Gaussian, sigma}; }
    static WindowSpec raised_cosine(double r) { return {Kind::RaisedCosine, r}; }
    static WindowSpec smooth_bump(double r) { return {Kind::SmoothBump, r}; }

    double eval(double u) const;  // u = |x - center|
    /// Effective support radius (5*sigma for the gaussian).
    double radius() const { return kind == Kind::Gaussian ? 5.0 * param : param; }
    WindowSpec halved() const { return {kind, param / 2.0}; }
    std::string name() const;
};

/// Pointwise product with the window centered at x0. Errors if the window
/// support sticks out of the grid box.
SampledField localize(const SampledField& f, const Pt& x0, const WindowSpec& w);

/// Sample a window as a field on a grid (used for cutoffs).
SampledField window_field(const Grid& g, const Pt& x0, const WindowSpec& w);

/// Circular shift by a grid-aligned offset v (v_a must be a multiple of h_a).
SampledField translate(const SampledField& f, const Pt& v);

/// Deterministic generator zoo for singular test fields.
struct GeneratorSpec {
    enum class Kind { Delta, Heaviside, PowerSingularity, Gaussian, LineDelta, Chirp, HeatParametrix };
    Kind kind = Kind::Delta;
    Pt x0 = Pt::Zero();
    double alpha = 0.5;          // power singularity exponent
    double sigma = 1.0;          // gaussian width
    double theta = 0.0;          // line normal angle (multiples of pi/4)
    double chirp_rate = 1.0;     // chirp e^{i rate x^2 / 2}
    double cutoff_radius = 4.0;  // power singularity envelope
    double lowcut = 1.0;         // heat parametrix low-frequency cutoff R0

    static GeneratorSpec delta(const Pt& x0);
    static GeneratorSpec heaviside(double x0);
    static GeneratorSpec power_singularity(double alpha, double x0, double cutoff_radius = 4.0);
    static GeneratorSpec gaussian(const Pt& x0, double sigma = 1.0);
    static GeneratorSpec line_delta(double theta, const Pt& x0 = Pt::Zero());
    static GeneratorSpec chirp(double rate, const Pt& x0 = Pt::Zero());
    static GeneratorSpec heat_parametrix(double lowcut = 1.0);
};

SampledField synth(const GeneratorSpec& gen, const Grid& g);

/// C-infinity transition: 0 for t <= 0, 1 for t >= 1.
double smoothstep_inf(double t);

// ---- file formats ----
// JSON header {dim, shape[], spacing[], origin[], dtype:"c128"} next to a raw
// little-endian (re, im) float64 payload; 1D CSV (x, re, im) also accepted.
void save_field(const SampledField& f, const std::string& json_path);
SampledField load_field(const std::string& path);

nlohmann::json field_header(const SampledField& f);

}  // namespace conefront
