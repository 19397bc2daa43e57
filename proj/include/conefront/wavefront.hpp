#pragma once

#include "conefront/coneharm.hpp"

#include <nlohmann/json_fwd.hpp>

namespace conefront {

enum class Flavor { FL, M, W };

std::string flavor_name(Flavor f);

/// Discretized detector for the wave-front definition: one canonical window
/// evaluated at two radii (r and r/2), widened sectors measured, base sectors
/// reported, slope verdicts per (center, sector).
struct DetectorConfig {
    WindowSpec window = WindowSpec::raised_cosine(2.0);
    ConePartition cones = ConePartition{1, 2, 1.0};
    double p = kInf;  // modulation flavors only
    double tau_finite = 0.1;
    double tau_inf = 0.05;
    /// Detector dynamic range: a profile whose fitted-window maximum falls
    /// below this fraction of the field's strongest profile (same weight) is
    /// treated as regular. Slopes are scale-free, so without a floor the
    /// detector would flag arbitrarily faint numerical skirts.
    double dynamic_range = 1e-3;
    int fit_width = 4;
    int skip_outer = 1;
    bool two_radii = true;
    Index stft_astep = 8;
    Index stft_bstep = 1;
    /// STFT analysis window for the modulation flavors; defaults to the
    /// localization window at twice the radius (less smear, steadier slopes).
    std::optional<WindowSpec> stft_window;
    WindowSpec effective_stft_window() const {
        if (stft_window) return *stft_window;
        WindowSpec w = window;
        w.param *= 2.0;
        return w;
    }
    std::vector<Pt> centers;

    /// Centers covering the grid interior, coarsened by the window radius.
    static std::vector<Pt> default_centers(const Grid& g, double radius);
    static DetectorConfig for_grid(const Grid& g, const WindowSpec& w, int n_sectors,
                                   double lambda = 1.5);
};

struct WfEntry {
    Pt x = Pt::Zero();
    int sector = 0;
    std::optional<double> slope;
    bool in_wf = false;
};

struct WavefrontEstimate {
    Flavor flavor = Flavor::FL;
    double q = 1.0;
    double p = kInf;
    std::string weight_id;
    int n_sectors = 2;
    int dim = 1;
    double window_radius = 0.0;
    std::string window_name;
    std::vector<Pt> centers;
    std::vector<WfEntry> entries;  // centers-major, sector-minor

    const WfEntry& at(Index center, int sector) const {
        return entries[static_cast<size_t>(center) * n_sectors + sector];
    }
    std::vector<std::pair<Index, int>> singular_pairs() const;
    bool empty_wf() const;
    nlohmann::json to_json() const;
};

WavefrontEstimate wavefront_set(const SampledField& f, const WeightSpec& w, double q,
                                const DetectorConfig& cfg, Flavor flavor = Flavor::FL);

/// Sup-type: singular unless every member space judges the direction regular.
WavefrontEstimate wavefront_sup(const SampledField& f, const std::vector<WeightSpec>& weights,
                                const std::vector<double>& qs, const DetectorConfig& cfg,
                                Flavor flavor = Flavor::FL);

/// Inf-type: singular only if every member judges it singular.
WavefrontEstimate wavefront_inf(const SampledField& f, const std::vector<WeightSpec>& weights,
                                const std::vector<double>& qs, const DetectorConfig& cfg,
                                Flavor flavor = Flavor::FL);

/// Classical wave-front surrogate: sup-type over <xi>^{sign*j}, j = 0..j_max,
/// q = inf. The weight family sign is exposed; +1 is the default.
WavefrontEstimate classical_wf(const SampledField& f, int j_max, const DetectorConfig& cfg,
                               int sign = +1);

}  // namespace conefront
