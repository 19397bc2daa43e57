#include "conefront/wavefront.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace conefront {

std::string flavor_name(Flavor f) {
    switch (f) {
        case Flavor::FL:
            return "FL";
        case Flavor::M:
            return "M";
        case Flavor::W:
            return "W";
    }
    return "?";
}

std::vector<Pt> DetectorConfig::default_centers(const Grid& g, double radius) {
    std::vector<Pt> out;
    std::array<std::vector<double>, 2> axis_pts;
    for (int a = 0; a < g.dim; ++a) {
        const double lo = g.x_min(a) + radius;
        const double hi = g.x_max(a) - radius;
        // Center spacing >= radius in whole cells, anchored at x = 0 when the
        // box straddles it: a window centered at any other center then
        // vanishes identically at an on-center singularity.
        const Index step =
            std::max<Index>(1, static_cast<Index>(std::ceil(radius / g.spacing[a] - 1e-9)));
        const double anchor = (g.x_min(a) <= 0.0 && g.x_max(a) >= 0.0) ? 0.0 : lo;
        const auto i_anchor = static_cast<Index>(std::llround((anchor - g.origin[a]) / g.spacing[a]));
        Index i_first = i_anchor;
        while (g.coord(a, i_first - step) >= lo) i_first -= step;
        for (Index i = i_first; g.coord(a, i) <= hi; i += step) {
            const double x = g.coord(a, i);
            if (x >= lo) axis_pts[a].push_back(x);
        }
        if (axis_pts[a].empty()) throw DomainError("window radius leaves no usable centers");
    }
    if (g.dim == 1) {
        for (double x : axis_pts[0]) out.push_back(Pt(x, 0.0));
    } else {
        for (double x : axis_pts[0])
            for (double y : axis_pts[1]) out.push_back(Pt(x, y));
    }
    return out;
}

DetectorConfig DetectorConfig::for_grid(const Grid& g, const WindowSpec& w, int n_sectors,
                                        double lambda) {
    DetectorConfig cfg;
    cfg.window = w;
    cfg.cones = make_cone_partition(g.dim, n_sectors, g.dim == 1 ? 1.0 : lambda);
    cfg.centers = default_centers(g, w.radius());
    cfg.stft_astep = std::max<Index>(1, static_cast<Index>(std::llround(w.radius() / (4.0 * g.spacing[0]))));
    return cfg;
}

std::vector<std::pair<Index, int>> WavefrontEstimate::singular_pairs() const {
    std::vector<std::pair<Index, int>> out;
    for (Index c = 0; c < static_cast<Index>(centers.size()); ++c)
        for (int j = 0; j < n_sectors; ++j)
            if (at(c, j).in_wf) out.emplace_back(c, j);
    return out;
}

bool WavefrontEstimate::empty_wf() const { return singular_pairs().empty(); }

nlohmann::json WavefrontEstimate::to_json() const {
    nlohmann::json j;
    j["detector"] = {{"flavor", flavor_name(flavor)},
                     {"q", q == kInf ? nlohmann::json("inf") : nlohmann::json(q)},
                     {"p", p == kInf ? nlohmann::json("inf") : nlohmann::json(p)},
                     {"weight_id", weight_id},
                     {"n_sectors", n_sectors},
                     {"dim", dim},
                     {"window", window_name},
                     {"window_radius", window_radius}};
    nlohmann::json entries_json = nlohmann::json::array();
    for (const auto& e : entries) {
        nlohmann::json ej;
        ej["x"] = dim == 1 ? std::vector<double>{e.x[0]} : std::vector<double>{e.x[0], e.x[1]};
        ej["sector"] = e.sector;
        ej["slope"] = e.slope ? nlohmann::json(*e.slope) : nlohmann::json(nullptr);
        ej["in_wf"] = e.in_wf;
        entries_json.push_back(ej);
    }
    j["entries"] = entries_json;
    return j;
}

namespace {

struct Member {
    WeightSpec w;
    double q;
};

enum class Combine { Single, Sup, Inf };

WavefrontEstimate detect(const SampledField& f, const std::vector<Member>& members,
                         Combine combine, const DetectorConfig& cfg, Flavor flavor) {
    if (members.empty()) throw DomainError("wavefront detector needs at least one member space");
    f.validate();
    WavefrontEstimate est;
    est.flavor = flavor;
    est.q = members.front().q;
    est.p = cfg.p;
    est.weight_id = members.front().w.id;
    est.dim = f.grid.dim;
    est.n_sectors = cfg.cones.n_sectors;
    est.window_radius = cfg.window.radius();
    est.window_name = cfg.window.name();
    est.centers = cfg.centers.empty() ? DetectorConfig::default_centers(f.grid, cfg.window.radius())
                                      : cfg.centers;
    est.entries.resize(est.centers.size() * est.n_sectors);

    std::vector<WindowSpec> radii{cfg.window};
    if (cfg.two_radii) radii.push_back(cfg.window.halved());

    // Pass 1: measure every (center, radius, member, sector) profile.
    struct Cell {
        bool measured = false;
        bool slope_singular = false;
        double fit_max = 0.0;
        std::optional<double> slope;
    };
    const size_t n_centers = est.centers.size();
    const size_t per_center = radii.size() * members.size() * est.n_sectors;
    std::vector<Cell> cells(n_centers * per_center);

    parallel_for(static_cast<Index>(n_centers), [&](Index ci) {
        const Pt x0 = est.centers[ci];
        for (size_t ri = 0; ri < radii.size(); ++ri) {
            const SampledField loc = localize(f, x0, radii[ri]);
            // window-taper underflow dust is absence of content, not content
            if (loc.sup_norm() <= 1e-13 * f.sup_norm()) continue;
            std::optional<Spectrum> F;
            std::optional<GaborCoefficients> G;
            if (flavor == Flavor::FL) {
                F = dft(loc);
            } else {
                G = stft(loc, cfg.effective_stft_window(), cfg.stft_astep, cfg.stft_bstep);
            }
            for (size_t mi = 0; mi < members.size(); ++mi) {
                for (int j = 0; j < est.n_sectors; ++j) {
                    const Sector sector = cfg.cones.widened(j);
                    DyadicProfile prof =
                        flavor == Flavor::FL
                            ? cone_seminorm_profile(*F, sector, members[mi].w, members[mi].q, x0,
                                                    cfg.fit_width, cfg.skip_outer)
                            : mod_seminorm_profile(*G, sector, members[mi].w, cfg.p, members[mi].q,
                                                   flavor == Flavor::M ? ModFlavor::M : ModFlavor::W,
                                                   cfg.fit_width, cfg.skip_outer);
                    Cell& cell = cells[(ci * radii.size() + ri) * members.size() * est.n_sectors +
                                       mi * est.n_sectors + j];
                    cell.measured = true;
                    cell.slope_singular = !profile_regular(prof, cfg.tau_finite, cfg.tau_inf);
                    cell.fit_max = prof.fit_window_max();
                    cell.slope = prof.slope;
                }
            }
        }
    });

    // Significance scale per member: profiles more than dynamic_range below
    // the field's strongest patch are below the slope test's resolving power.
    std::vector<double> member_scale(members.size(), 0.0);
    for (size_t ci = 0; ci < n_centers; ++ci)
        for (size_t ri = 0; ri < radii.size(); ++ri)
            for (size_t mi = 0; mi < members.size(); ++mi)
                for (int j = 0; j < est.n_sectors; ++j) {
                    const Cell& cell = cells[(ci * radii.size() + ri) * members.size() * est.n_sectors +
                                             mi * est.n_sectors + j];
                    member_scale[mi] = std::max(member_scale[mi], cell.fit_max);
                }

    // Pass 2: a pair is singular for a member only if every probed radius
    // says so (the definition quantifies over all windows) at significant
    // amplitude; members combine per the sup/inf semantics.
    for (size_t ci = 0; ci < n_centers; ++ci) {
        for (int j = 0; j < est.n_sectors; ++j) {
            std::optional<double> slope;
            bool in_wf = combine == Combine::Inf;
            for (size_t mi = 0; mi < members.size(); ++mi) {
                bool member_singular = true;
                for (size_t ri = 0; ri < radii.size(); ++ri) {
                    const Cell& cell = cells[(ci * radii.size() + ri) * members.size() * est.n_sectors +
                                             mi * est.n_sectors + j];
                    const bool significant =
                        cell.measured && cell.fit_max > cfg.dynamic_range * member_scale[mi];
                    member_singular = member_singular && significant && cell.slope_singular;
                    if (cell.slope && (!slope || *cell.slope > *slope)) slope = cell.slope;
                }
                if (combine == Combine::Inf) {
                    in_wf = in_wf && member_singular;
                } else {
                    in_wf = in_wf || member_singular;
                }
            }
            WfEntry e;
            e.x = est.centers[ci];
            e.sector = j;
            e.slope = slope;
            e.in_wf = in_wf;
            est.entries[ci * est.n_sectors + j] = e;
        }
    }
    return est;
}

}  // namespace

WavefrontEstimate wavefront_set(const SampledField& f, const WeightSpec& w, double q,
                                const DetectorConfig& cfg, Flavor flavor) {
    return detect(f, {Member{w, q}}, Combine::Single, cfg, flavor);
}

WavefrontEstimate wavefront_sup(const SampledField& f, const std::vector<WeightSpec>& weights,
                                const std::vector<double>& qs, const DetectorConfig& cfg,
                                Flavor flavor) {
    if (weights.empty() || weights.size() != qs.size())
        throw DomainError("wavefront_sup: weights and qs must be nonempty and of equal length");
    std::vector<Member> members;
    for (size_t i = 0; i < weights.size(); ++i) members.push_back({weights[i], qs[i]});
    return detect(f, members, Combine::Sup, cfg, flavor);
}

WavefrontEstimate wavefront_inf(const SampledField& f, const std::vector<WeightSpec>& weights,
                                const std::vector<double>& qs, const DetectorConfig& cfg,
                                Flavor flavor) {
    if (weights.empty() || weights.size() != qs.size())
        throw DomainError("wavefront_inf: weights and qs must be nonempty and of equal length");
    std::vector<Member> members;
    for (size_t i = 0; i < weights.size(); ++i) members.push_back({weights[i], qs[i]});
    return detect(f, members, Combine::Inf, cfg, flavor);
}

WavefrontEstimate classical_wf(const SampledField& f, int j_max, const DetectorConfig& cfg,
                               int sign) {
    if (j_max < 0) throw DomainError("classical_wf: j_max must be nonnegative");
    std::vector<WeightSpec> weights;
    std::vector<double> qs;
    for (int j = 0; j <= j_max; ++j) {
        weights.push_back(WeightSpec::japanese_bracket(sign * j, f.grid.dim));
        qs.push_back(kInf);
    }
    return wavefront_sup(f, weights, qs, cfg);
}

}  // namespace conefront
