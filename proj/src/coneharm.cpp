#include "conefront/coneharm.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <map>

namespace conefront {

namespace {

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0) a += kTwoPi;
    return a;
}

// signed angular difference in (-pi, pi]
double ang_diff(double a, double b) {
    double d = std::fmod(a - b, kTwoPi);
    if (d <= -kPi) d += kTwoPi;
    if (d > kPi) d -= kTwoPi;
    return d;
}

}  // namespace

bool Sector::contains(const Pt& xi) const {
    if (d == 1) {
        if (xi[0] == 0.0) return false;
        return full || (sign > 0 ? xi[0] > 0.0 : xi[0] < 0.0);
    }
    if (xi[0] == 0.0 && xi[1] == 0.0) return false;
    if (full) return true;
    const double theta = wrap_angle(std::atan2(xi[1], xi[0]));
    if (tile_n > 0) {
        // exact tiling; immune to ulp cracks on the axis directions
        auto j = static_cast<long>(std::floor(theta / (kTwoPi / tile_n)));
        j = ((j % tile_n) + tile_n) % tile_n;
        return j == index;
    }
    return std::abs(ang_diff(theta, center)) <= half_width;
}

Sector ConePartition::base(int j) const {
    Sector s;
    s.d = d;
    s.index = j;
    if (d == 1) {
        s.sign = (j == 0) ? +1 : -1;
        return s;
    }
    s.half_width = kPi / n_sectors;
    s.center = kTwoPi * j / n_sectors + s.half_width;
    s.tile_n = n_sectors;
    return s;
}

Sector ConePartition::widened(int j) const {
    Sector s = base(j);
    if (d == 2) {
        s.half_width *= lambda;
        s.tile_n = 0;  // widened arcs overlap; closed angular-distance test
    }
    return s;
}

Sector ConePartition::everything(int d) {
    Sector s;
    s.d = d;
    s.full = true;
    return s;
}

ConePartition make_cone_partition(int d, int n_sectors, double lambda) {
    if (d == 1) {
        // any requested count collapses to the two half-lines
        if (n_sectors < 2) throw DomainError("cone partition: need at least the two half-lines");
        return ConePartition{1, 2, 1.0};
    }
    if (d != 2) throw DomainError("cone partition: d must be 1 or 2");
    if (n_sectors < 4) throw DomainError("cone partition: need n_sectors >= 4 in d=2");
    if (lambda < 1.0 || lambda > 2.0) throw DomainError("cone partition: lambda must be in [1,2]");
    return ConePartition{2, n_sectors, lambda};
}

namespace {

struct Accum {
    double sum = 0.0;  // sum of |F w|^q for finite q
    double max = 0.0;
    long count = 0;
};

DyadicProfile finalize_profile(std::map<int, Accum>& bins, double q, double cell, int fit_width,
                               int sector_index, const std::string& weight_id, int skip_outer) {
    if (bins.size() < 3)
        throw InsufficientResolutionError("fewer than 3 usable dyadic annuli in the cone");
    DyadicProfile p;
    p.q = q;
    p.fit_width = fit_width;
    p.sector_index = sector_index;
    p.weight_id = weight_id;
    p.k_min = bins.begin()->first;
    p.k_max = bins.rbegin()->first;
    p.S.assign(static_cast<size_t>(p.k_max - p.k_min + 1), std::numeric_limits<double>::quiet_NaN());
    for (const auto& [k, acc] : bins) {
        double v;
        if (q == kInf) {
            v = acc.max;
        } else {
            v = std::pow(cell * acc.sum, 1.0 / q);
        }
        p.S[static_cast<size_t>(k - p.k_min)] = v;
    }

    // Fit over the top fit_width usable annuli below the aliasing guard.
    std::vector<int> usable;
    for (const auto& [k, acc] : bins) usable.push_back(k);
    for (int s = 0; s < skip_outer && usable.size() > 2; ++s) usable.pop_back();
    while (static_cast<int>(usable.size()) > fit_width) usable.erase(usable.begin());
    std::vector<double> ks, logs;
    if (!usable.empty()) {
        p.fit_k_lo = usable.front();
        p.fit_k_hi = usable.back();
    }
    for (int k : usable) {
        const double v = p.value(k);
        if (v > 0.0 && std::isfinite(v)) {
            ks.push_back(k);
            logs.push_back(std::log2(v));
        }
    }
    if (ks.size() >= 2) {
        p.slope = fit_line(ks, logs).slope;
    }
    return p;
}

}  // namespace

double DyadicProfile::fit_window_max() const {
    double m = 0.0;
    for (int k = std::max(fit_k_lo, k_min); k <= std::min(fit_k_hi, k_max); ++k) {
        const double v = value(k);
        if (std::isfinite(v)) m = std::max(m, v);
    }
    return m;
}

bool profile_regular(const DyadicProfile& p, double tau_finite, double tau_inf) {
    if (!p.slope.has_value()) return true;  // vanishing or band-concentrated profile
    return p.q == kInf ? *p.slope <= tau_inf : *p.slope <= -tau_finite;
}

DyadicProfile cone_seminorm_profile(const Spectrum& F, const Sector& sector, const WeightSpec& w,
                                    double q, const Pt& x0, int fit_width, int skip_outer) {
    if (!(q >= 1.0)) throw DomainError("cone seminorm: q must be in [1, inf]");
    std::map<int, Accum> bins;
    const Grid& g = F.grid;
    for (Index k = 0; k < g.size(); ++k) {
        const Pt z = g.freq_point(k);
        double r = 0.0;
        for (int a = 0; a < g.dim; ++a) r += z[a] * z[a];
        r = std::sqrt(r);
        if (r == 0.0 || !sector.contains(z)) continue;
        const int bin = static_cast<int>(std::floor(std::log2(r)));
        const double v = std::abs(F.values[k]) * eval_weight(w, x0, z);
        auto& acc = bins[bin];
        ++acc.count;
        if (q == kInf) {
            acc.max = std::max(acc.max, v);
        } else {
            acc.sum += std::pow(v, q);
        }
    }
    return finalize_profile(bins, q, g.freq_cell_volume(), fit_width, sector.index, w.id, skip_outer);
}

double full_seminorm(const DyadicProfile& p) {
    double acc = 0.0;
    for (int k = p.k_min; k <= p.k_max; ++k) {
        const double v = p.value(k);
        if (std::isnan(v)) continue;
        if (p.q == kInf) {
            acc = std::max(acc, v);
        } else {
            acc += std::pow(v, p.q);
        }
    }
    return p.q == kInf ? acc : std::pow(acc, 1.0 / p.q);
}

nlohmann::json DyadicProfile::to_json(double tau_finite, double tau_inf) const {
    nlohmann::json j;
    j["sector"] = sector_index;
    j["q"] = q == kInf ? nlohmann::json("inf") : nlohmann::json(q);
    j["weight_id"] = weight_id;
    j["k_min"] = k_min;
    j["K"] = fit_width;
    nlohmann::json arr = nlohmann::json::array();
    for (double v : S) {
        if (std::isnan(v)) {
            arr.push_back(nullptr);
        } else {
            arr.push_back(v);
        }
    }
    j["S"] = arr;
    j["slope"] = slope ? nlohmann::json(*slope) : nlohmann::json(nullptr);
    j["verdict"] = profile_regular(*this, tau_finite, tau_inf) ? "regular" : "singular";
    return j;
}

Pt GaborCoefficients::freq_at(Index sub) const {
    Pt z = Pt::Zero();
    if (grid.dim == 1) {
        z[0] = grid.freq(0, sub * bstep);
    } else {
        const Index i = sub / nxi[1], j = sub % nxi[1];
        z[0] = grid.freq(0, i * bstep);
        z[1] = grid.freq(1, j * bstep);
    }
    return z;
}

double GaborCoefficients::x_measure() const {
    double m = 1.0;
    for (int a = 0; a < grid.dim; ++a) m *= grid.spacing[a] * static_cast<double>(astep);
    return m;
}

double GaborCoefficients::xi_measure() const {
    double m = 1.0;
    for (int a = 0; a < grid.dim; ++a) m *= grid.freq_spacing(a) * static_cast<double>(bstep);
    return m;
}

GaborCoefficients stft(const SampledField& f, const WindowSpec& w, Index astep, Index bstep) {
    if (astep < 1 || bstep < 1) throw DomainError("stft: lattice steps must be positive integers");
    const Grid& g = f.grid;
    GaborCoefficients G;
    G.grid = g;
    G.window = w;
    G.astep = astep;
    G.bstep = bstep;
    for (int a = 0; a < g.dim; ++a) {
        G.npos[a] = (g.shape[a] + astep - 1) / astep;
        G.nxi[a] = (g.shape[a] + bstep - 1) / bstep;
    }
    G.warning_coarse = static_cast<double>(astep) * g.spacing[0] > w.radius();

    const Index npos_total = g.dim == 1 ? G.npos[0] : G.npos[0] * G.npos[1];
    const Index nfreq_total = g.dim == 1 ? G.nxi[0] : G.nxi[0] * G.nxi[1];
    G.positions.resize(npos_total);
    G.coeffs.resize(npos_total * nfreq_total);

    parallel_for(npos_total, [&](Index pflat) {
        Index p0, p1;
        if (g.dim == 1) {
            p0 = pflat;
            p1 = 0;
        } else {
            p0 = pflat / G.npos[1];
            p1 = pflat % G.npos[1];
        }
        Pt xm = Pt::Zero();
        xm[0] = g.coord(0, p0 * astep);
        if (g.dim == 2) xm[1] = g.coord(1, p1 * astep);
        G.positions[pflat] = xm;

        // V_phi f(x, .) is the transform of f * conj(phi(. - x)).
        ArrayXc prod(g.size());
        for (Index k = 0; k < g.size(); ++k) {
            const Pt y = g.point(k);
            double r2 = 0.0;
            for (int a = 0; a < g.dim; ++a) r2 += (y[a] - xm[a]) * (y[a] - xm[a]);
            prod[k] = f.values[k] * std::conj(Complex(w.eval(std::sqrt(r2)), 0.0));
        }
        Spectrum col = dft(SampledField{g, std::move(prod)});
        for (Index sub = 0; sub < nfreq_total; ++sub) {
            Index full;
            if (g.dim == 1) {
                full = sub * bstep;
            } else {
                const Index i = sub / G.nxi[1], j = sub % G.nxi[1];
                full = g.flat(i * bstep, j * bstep);
            }
            G.coeffs[pflat * nfreq_total + sub] = col.values[full];
        }
    });
    return G;
}

DyadicProfile mod_seminorm_profile(const GaborCoefficients& G, const Sector& sector,
                                   const WeightSpec& w, double p, double q, ModFlavor flavor,
                                   int fit_width, int skip_outer) {
    if (!(p >= 1.0) || !(q >= 1.0)) throw DomainError("mod seminorm: exponents must be in [1, inf]");
    const Index npos = G.n_positions();
    const Index nfreq = G.n_freqs();

    // Collect per-annulus frequency lists once.
    std::map<int, std::vector<Index>> annulus;
    for (Index sub = 0; sub < nfreq; ++sub) {
        const Pt z = G.freq_at(sub);
        double r = 0.0;
        for (int a = 0; a < G.grid.dim; ++a) r += z[a] * z[a];
        r = std::sqrt(r);
        if (r == 0.0 || !sector.contains(z)) continue;
        annulus[static_cast<int>(std::floor(std::log2(r)))].push_back(sub);
    }

    std::map<int, Accum> bins;
    const double xm = G.x_measure();
    if (flavor == ModFlavor::M) {
        // inner L^p over x, outer l^q over xi restricted to the annulus
        for (const auto& [k, subs] : annulus) {
            auto& acc = bins[k];
            for (Index sub : subs) {
                const Pt z = G.freq_at(sub);
                double inner_sum = 0.0, inner_max = 0.0;
                for (Index m = 0; m < npos; ++m) {
                    const double v = std::abs(G.at(m, sub)) * eval_weight(w, G.positions[m], z);
                    if (p == kInf) {
                        inner_max = std::max(inner_max, v);
                    } else {
                        inner_sum += std::pow(v, p);
                    }
                }
                const double inner = p == kInf ? inner_max : std::pow(xm * inner_sum, 1.0 / p);
                ++acc.count;
                if (q == kInf) {
                    acc.max = std::max(acc.max, inner);
                } else {
                    acc.sum += std::pow(inner, q);
                }
            }
        }
        return finalize_profile(bins, q, G.xi_measure(), fit_width, sector.index, w.id, skip_outer);
    }

    // W flavor: inner l^q over xi in the annulus, outer L^p over x.
    for (const auto& [k, subs] : annulus) {
        auto& acc = bins[k];
        acc.count = static_cast<long>(subs.size());
        double outer_sum = 0.0, outer_max = 0.0;
        for (Index m = 0; m < npos; ++m) {
            double inner_sum = 0.0, inner_max = 0.0;
            for (Index sub : subs) {
                const Pt z = G.freq_at(sub);
                const double v = std::abs(G.at(m, sub)) * eval_weight(w, G.positions[m], z);
                if (q == kInf) {
                    inner_max = std::max(inner_max, v);
                } else {
                    inner_sum += std::pow(v, q);
                }
            }
            const double inner = q == kInf ? inner_max : std::pow(G.xi_measure() * inner_sum, 1.0 / q);
            if (p == kInf) {
                outer_max = std::max(outer_max, inner);
            } else {
                outer_sum += std::pow(inner, p);
            }
        }
        // store the finished annulus value directly
        if (q == kInf) {
            acc.max = p == kInf ? outer_max : std::pow(xm * outer_sum, 1.0 / p);
        } else {
            const double v = p == kInf ? outer_max : std::pow(xm * outer_sum, 1.0 / p);
            acc.max = v;
        }
    }
    // W profiles carry finished values in acc.max regardless of q.
    std::map<int, Accum> finished;
    for (auto& [k, acc] : bins) {
        Accum a;
        a.count = acc.count;
        a.max = acc.max;
        a.sum = 0.0;
        finished[k] = a;
    }
    DyadicProfile prof;
    {
        // reuse finalize via the q = inf path on prefilled maxima
        std::map<int, Accum> tmp = finished;
        prof = finalize_profile(tmp, kInf, 1.0, fit_width, sector.index, w.id, skip_outer);
        prof.q = q;
    }
    return prof;
}

}  // namespace conefront
