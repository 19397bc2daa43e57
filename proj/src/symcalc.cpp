#include "conefront/symcalc.hpp"

#include "conefront/fft.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <map>
#include <sstream>

namespace conefront {

namespace {

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0) a += kTwoPi;
    return a;
}

double ang_dist(double a, double b) {
    double d = std::abs(wrap_angle(a) - wrap_angle(b));
    return std::min(d, kTwoPi - d);
}

Complex checked(Complex v, const std::string& id) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw DomainError("symbol '" + id + "' evaluated to a non-finite value");
    return v;
}

int total(const std::array<int, 2>& m) { return m[0] + m[1]; }

}  // namespace

std::array<Index, 4> SymbolGrid::tensor_shape() const {
    std::array<Index, 4> s{1, 1, 1, 1};
    if (with_x) {
        s[0] = field.shape[0];
        if (field.dim == 2) s[1] = field.shape[1];
    }
    s[2] = field.shape[0];
    if (field.dim == 2) s[3] = field.shape[1];
    return s;
}

// ---- presets ----

SymbolSpec SymbolSpec::multiplier_bracket(double s, int d) {
    SymbolSpec a;
    a.d = d;
    a.kind = Kind::Multiplier;
    std::ostringstream os;
    os << "bracket^" << s;
    a.id = os.str();
    a.x_independent = true;
    a.omega0 = WeightSpec::japanese_bracket(s, d);
    a.rho = 1.0;
    a.fn = [s, d](const Pt&, const Pt& xi) { return Complex(std::pow(bracket(xi, d), s), 0.0); };
    return a;
}

SymbolSpec SymbolSpec::modulated_bracket(double c0, double c1, double k, double s, int d) {
    SymbolSpec a;
    a.d = d;
    a.kind = Kind::Callable;
    std::ostringstream os;
    os << "(" << c0 << "+" << c1 << "cos(" << k << "x))*bracket^" << s;
    a.id = os.str();
    a.x_independent = false;
    a.omega0 = WeightSpec::japanese_bracket(s, d);
    a.rho = 1.0;
    a.fn = [c0, c1, k, s, d](const Pt& x, const Pt& xi) {
        return Complex((c0 + c1 * std::cos(k * x[0])) * std::pow(bracket(xi, d), s), 0.0);
    };
    if (d == 1) {
        // exact partials in d=1: m^(n)(x) cycles through cos, bracket powers recurse
        a.partial_fn = [c0, c1, k, s](const std::array<int, 2>& al, const std::array<int, 2>& be,
                                      const Pt& x, const Pt& xi) -> Complex {
            const int n = al[0];
            double m;
            switch (n % 4) {
                case 0: m = std::cos(k * x[0]); break;
                case 1: m = -std::sin(k * x[0]); break;
                case 2: m = -std::cos(k * x[0]); break;
                default: m = std::sin(k * x[0]);
            }
            m *= c1 * std::pow(k, n);
            if (n == 0) m += c0;
            // d^b/dxi^b (1+xi^2)^{s/2} for b <= 3
            const double t = xi[0];
            const double u = 1.0 + t * t;
            double g;
            switch (be[0]) {
                case 0: g = std::pow(u, s / 2.0); break;
                case 1: g = s * t * std::pow(u, s / 2.0 - 1.0); break;
                case 2:
                    g = s * std::pow(u, s / 2.0 - 1.0) + s * (s - 2.0) * t * t * std::pow(u, s / 2.0 - 2.0);
                    break;
                case 3:
                    g = 3.0 * s * (s - 2.0) * t * std::pow(u, s / 2.0 - 2.0) +
                        s * (s - 2.0) * (s - 4.0) * t * t * t * std::pow(u, s / 2.0 - 3.0);
                    break;
                default:
                    throw DomainError("modulated_bracket closed-form partials stop at order 3");
            }
            return Complex(m * g, 0.0);
        };
    }
    return a;
}

SymbolSpec SymbolSpec::xmultiplier_cos(double c0, double c1, double k, int d) {
    SymbolSpec a;
    a.d = d;
    a.kind = Kind::XMultiplier;
    std::ostringstream os;
    os << c0 << "+" << c1 << "cos(" << k << "x)";
    a.id = os.str();
    a.x_independent = false;
    a.xi_independent = true;
    a.omega0 = WeightSpec::constant(1.0, d);
    a.rho = 1.0;
    a.fn = [c0, c1, k](const Pt& x, const Pt&) { return Complex(c0 + c1 * std::cos(k * x[0]), 0.0); };
    return a;
}

SymbolSpec SymbolSpec::heat_symbol() {
    SymbolSpec a;
    a.d = 2;
    a.kind = Kind::Heat;
    a.id = "heat";
    a.x_independent = true;
    a.omega0 = WeightSpec::heat();
    a.rho = 0.5;
    a.fn = [](const Pt&, const Pt& xi) { return Complex(xi[0] * xi[0], xi[1]); };
    a.partial_fn = [](const std::array<int, 2>& al, const std::array<int, 2>& be, const Pt&,
                      const Pt& xi) -> Complex {
        if (al[0] || al[1]) return 0.0;
        if (be[0] == 0 && be[1] == 0) return Complex(xi[0] * xi[0], xi[1]);
        if (be[0] == 1 && be[1] == 0) return Complex(2.0 * xi[0], 0.0);
        if (be[0] == 2 && be[1] == 0) return Complex(2.0, 0.0);
        if (be[0] == 0 && be[1] == 1) return Complex(0.0, 1.0);
        return 0.0;
    };
    return a;
}

SymbolSpec SymbolSpec::directional(double s, double theta0, double hw_inner, double hw_outer, int d) {
    if (hw_outer <= hw_inner) throw DomainError("directional symbol: need hw_outer > hw_inner");
    SymbolSpec a;
    a.d = d;
    a.kind = Kind::Directional;
    std::ostringstream os;
    os << "directional(s=" << s << ",theta0=" << theta0 << ")";
    a.id = os.str();
    a.x_independent = true;
    a.omega0 = WeightSpec::japanese_bracket(s, d);
    a.rho = 1.0;
    if (d == 1) {
        const double sign = std::cos(theta0) >= 0.0 ? 1.0 : -1.0;
        a.fn = [s, sign](const Pt&, const Pt& xi) {
            const double t = sign * xi[0];
            const double cut = smoothstep_inf((t + 1.0) / 2.0);  // 0 for t<=-1, 1 for t>=1
            return Complex(cut * std::pow(bracket(xi, 1), s), 0.0);
        };
    } else {
        a.fn = [s, theta0, hw_inner, hw_outer](const Pt&, const Pt& xi) {
            const double r = std::hypot(xi[0], xi[1]);
            if (r == 0.0) return Complex(0.0, 0.0);
            const double dist = ang_dist(std::atan2(xi[1], xi[0]), theta0);
            const double g = smoothstep_inf((dist - hw_inner) / (hw_outer - hw_inner));
            const double ramp = smoothstep_inf(r - 1.0);  // kill the conic corner at the origin
            return Complex(g * ramp * std::pow(bracket(xi, 2), s), 0.0);
        };
    }
    return a;
}

SymbolSpec SymbolSpec::phase(const Pt& x0, int d) {
    SymbolSpec a;
    a.d = d;
    a.kind = Kind::Phase;
    std::ostringstream os;
    os << "phase(x0=" << x0[0];
    if (d == 2) os << "," << x0[1];
    os << ")";
    a.id = os.str();
    a.x_independent = true;
    a.omega0 = WeightSpec::constant(1.0, d);
    a.rho = 0.0;
    a.fn = [x0, d](const Pt&, const Pt& xi) {
        double dot = 0.0;
        for (int i = 0; i < d; ++i) dot += x0[i] * xi[i];
        return Complex(std::cos(dot), -std::sin(dot));
    };
    a.partial_fn = [x0, d](const std::array<int, 2>& al, const std::array<int, 2>& be, const Pt&,
                           const Pt& xi) -> Complex {
        if (al[0] || al[1]) return 0.0;
        double dot = 0.0;
        for (int i = 0; i < d; ++i) dot += x0[i] * xi[i];
        Complex v(std::cos(dot), -std::sin(dot));
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < be[i]; ++k) v *= Complex(0.0, -x0[i]);
        return v;
    };
    return a;
}

SymbolSpec SymbolSpec::from_callable(std::string id, int d,
                                     std::function<Complex(const Pt&, const Pt&)> fn, bool x_indep,
                                     bool xi_indep) {
    SymbolSpec a;
    a.d = d;
    a.kind = Kind::Callable;
    a.id = std::move(id);
    a.fn = std::move(fn);
    a.x_independent = x_indep;
    a.xi_independent = xi_indep;
    a.omega0 = WeightSpec::constant(1.0, d);
    return a;
}

SymbolSpec SymbolSpec::from_samples(SymbolSamples samples, std::string id) {
    SymbolSpec a;
    a.d = samples.grid.field.dim;
    a.kind = Kind::Array;
    a.id = std::move(id);
    a.x_independent = !samples.grid.with_x;
    a.omega0 = WeightSpec::constant(1.0, a.d);
    a.samples = std::make_shared<SymbolSamples>(std::move(samples));
    const auto& sm = *a.samples;
    a.fn = [sm](const Pt& x, const Pt& xi) -> Complex {
        // array symbols evaluate on their native lattice only
        Index ix = 0;
        if (sm.grid.with_x) {
            const auto ij = sm.grid.field.nearest(x);
            ix = sm.grid.field.flat(ij[0], ij[1]);
        }
        const Grid& g = sm.grid.field;
        std::array<Index, 2> ij{0, 0};
        for (int a2 = 0; a2 < g.dim; ++a2) {
            const double t = (xi[a2] - g.freq_min(a2)) / g.freq_spacing(a2);
            const auto i = static_cast<Index>(std::llround(t));
            if (i < 0 || i >= g.shape[a2] || std::abs(t - static_cast<double>(i)) > 1e-6)
                throw DomainError("array symbol evaluated off its frequency lattice");
            ij[a2] = i;
        }
        return sm.at(ix, g.flat(ij[0], ij[1]));
    };
    return a;
}

SymbolSpec SymbolSpec::with_band_taper(double nyq, double start_frac) const {
    if (kind == Kind::Array) throw DomainError("band taper applies to evaluable symbols");
    SymbolSpec out = *this;
    out.id = id + "*rolloff";
    out.partial_fn = nullptr;  // derivatives fall back to finite differences
    const double start = start_frac * nyq;
    const double stop = 0.995 * nyq;
    const int d = this->d;
    auto inner = fn;
    // The roll-off goes all the way to zero: any residual xi-dependence at the
    // wrap (even a scaled one) keeps a derivative kink there.
    out.fn = [inner, start, stop, d](const Pt& x, const Pt& xi) {
        double r = 0.0;
        for (int ax = 0; ax < d; ++ax) r += xi[ax] * xi[ax];
        r = std::sqrt(r);
        if (r >= stop) return Complex(0.0, 0.0);
        double t = 1.0;
        if (r > start) t = smoothstep_inf((stop - r) / (stop - start));
        return t * inner(x, xi);
    };
    return out;
}

Complex SymbolSpec::eval(const Pt& x, const Pt& xi) const {
    if (!fn) throw DomainError("symbol has no evaluator");
    return checked(fn(x, xi), id);
}

Complex eval_symbol(const SymbolSpec& a, const Pt& x, const Pt& xi) { return a.eval(x, xi); }

// ---- sampling and derivatives ----

SymbolSamples SymbolSpec::sample(const SymbolGrid& sg) const {
    if (kind == Kind::Array) {
        if (!samples) throw DomainError("array symbol without payload");
        if (!samples->grid.field.same_geometry(sg.field) || samples->grid.with_x != sg.with_x)
            throw DomainError("array symbol sampled on a different grid");
        return *samples;
    }
    SymbolSamples out;
    out.grid = sg;
    out.v.resize(sg.n_x() * sg.n_xi());
    const Index nxi = sg.n_xi();
    parallel_for(sg.n_x(), [&](Index ix) {
        const Pt x = sg.x_point(ix);
        for (Index j = 0; j < nxi; ++j) out.v[ix * nxi + j] = checked(fn(x, sg.xi_point(j)), id);
    });
    return out;
}

namespace {

// Derivative along one tensor dimension by 4th-order finite differences.
// Spatial (x) dimensions are periodic; frequency dimensions are not, so the
// edges use one-sided stencils (a spectral derivative would ring globally off
// the non-periodic wrap of a sampled decaying symbol).
void fd_derivative_dim(ArrayXc& v, const std::array<Index, 4>& shape, int dim, double spacing,
                       int order, bool periodic) {
    const Index n = shape[dim];
    if (n == 1) throw DomainError("derivative along a degenerate dimension");
    if (n < 6) throw DomainError("derivative needs at least 6 samples along the dimension");
    std::array<Index, 4> strides;
    strides[3] = 1;
    for (int k = 2; k >= 0; --k) strides[k] = strides[k + 1] * shape[k + 1];

    // 5-point first-derivative stencils (x12/h): centered and one-sided
    static const double c_mid[5] = {1.0, -8.0, 0.0, 8.0, -1.0};     // offsets -2..2
    static const double c_edge0[5] = {-25.0, 48.0, -36.0, 16.0, -3.0};  // offsets 0..4
    static const double c_edge1[5] = {-3.0, -10.0, 18.0, -6.0, 1.0};    // offsets -1..3

    ArrayXc line(n), dline(n);
    const Index n_lines = v.size() / n;
    for (Index l = 0; l < n_lines; ++l) {
        Index rem = l, base = 0;
        for (int k = 3; k >= 0; --k) {
            if (k == dim) continue;
            const Index ik = rem % shape[k];
            rem /= shape[k];
            base += ik * strides[k];
        }
        for (Index m = 0; m < n; ++m) line[m] = v[base + m * strides[dim]];
        for (int o = 0; o < order; ++o) {
            for (Index m = 0; m < n; ++m) {
                Complex acc(0.0, 0.0);
                if (periodic) {
                    for (int s = 0; s < 5; ++s)
                        acc += c_mid[s] * line[(m + n + s - 2) % n];
                } else if (m >= 2 && m + 2 < n) {
                    for (int s = 0; s < 5; ++s) acc += c_mid[s] * line[m + s - 2];
                } else if (m <= 1) {
                    const double* c = (m == 0) ? c_edge0 : c_edge1;
                    const Index start = (m == 0) ? 0 : m - 1;
                    for (int s = 0; s < 5; ++s) acc += c[s] * line[start + s];
                } else {  // mirrored one-sided stencils at the top edge
                    const double* c = (m == n - 1) ? c_edge0 : c_edge1;
                    if (m == n - 1) {
                        for (int s = 0; s < 5; ++s) acc -= c[s] * line[n - 1 - s];
                    } else {
                        for (int s = 0; s < 5; ++s) acc -= c[s] * line[m + 1 - s];
                    }
                }
                dline[m] = acc / (12.0 * spacing);
            }
            line = dline;
        }
        for (Index m = 0; m < n; ++m) v[base + m * strides[dim]] = line[m];
    }
}

Complex fd_partial(const SymbolSpec& a, std::array<int, 2> alpha, std::array<int, 2> beta, Pt x,
                   Pt xi, const Pt& hx, const Pt& hxi) {
    for (int ax = 0; ax < 2; ++ax) {
        if (alpha[ax] > 0) {
            auto al = alpha;
            al[ax] -= 1;
            Pt xp = x, xm = x;
            xp[ax] += hx[ax];
            xm[ax] -= hx[ax];
            return (fd_partial(a, al, beta, xp, xi, hx, hxi) - fd_partial(a, al, beta, xm, xi, hx, hxi)) /
                   (2.0 * hx[ax]);
        }
    }
    for (int ax = 0; ax < 2; ++ax) {
        if (beta[ax] > 0) {
            auto be = beta;
            be[ax] -= 1;
            Pt xip = xi, xim = xi;
            xip[ax] += hxi[ax];
            xim[ax] -= hxi[ax];
            return (fd_partial(a, alpha, be, x, xip, hx, hxi) - fd_partial(a, alpha, be, x, xim, hx, hxi)) /
                   (2.0 * hxi[ax]);
        }
    }
    return a.eval(x, xi);
}

}  // namespace

SymbolSamples SymbolSpec::partial_samples(const std::array<int, 2>& alpha,
                                          const std::array<int, 2>& beta,
                                          const SymbolGrid& sg) const {
    const bool zero_by_flags =
        (x_independent && total(alpha) > 0) || (xi_independent && total(beta) > 0);
    if (zero_by_flags) {
        SymbolSamples out;
        out.grid = sg;
        out.v = ArrayXc::Zero(sg.n_x() * sg.n_xi());
        return out;
    }
    if (total(alpha) == 0 && total(beta) == 0) return sample(sg);

    if (partial_fn) {
        SymbolSamples out;
        out.grid = sg;
        out.v.resize(sg.n_x() * sg.n_xi());
        const Index nxi = sg.n_xi();
        parallel_for(sg.n_x(), [&](Index ix) {
            const Pt x = sg.x_point(ix);
            for (Index j = 0; j < nxi; ++j)
                out.v[ix * nxi + j] = checked(partial_fn(alpha, beta, x, sg.xi_point(j)), id);
        });
        return out;
    }

    if (kind == Kind::Array) {
        SymbolSamples out = sample(sg);
        const auto shape = sg.tensor_shape();
        for (int ax = 0; ax < 2; ++ax)
            if (alpha[ax] > 0)
                fd_derivative_dim(out.v, shape, ax, sg.field.spacing[ax], alpha[ax], true);
        for (int ax = 0; ax < 2; ++ax)
            if (beta[ax] > 0)
                fd_derivative_dim(out.v, shape, 2 + ax, sg.field.freq_spacing(ax), beta[ax], false);
        return out;
    }

    // finite differences on the evaluable at grid-derived steps
    SymbolSamples out;
    out.grid = sg;
    out.v.resize(sg.n_x() * sg.n_xi());
    Pt hx = Pt::Ones(), hxi = Pt::Ones();
    for (int ax = 0; ax < sg.field.dim; ++ax) {
        hx[ax] = sg.field.spacing[ax];
        hxi[ax] = sg.field.freq_spacing(ax);
    }
    const Index nxi = sg.n_xi();
    parallel_for(sg.n_x(), [&](Index ix) {
        const Pt x = sg.x_point(ix);
        for (Index j = 0; j < nxi; ++j)
            out.v[ix * nxi + j] = fd_partial(*this, alpha, beta, x, sg.xi_point(j), hx, hxi);
    });
    return out;
}

// ---- class membership / ellipticity / characteristic set ----

ClassReport check_symbol_class(const SymbolSpec& a, const WeightSpec& omega0, double rho,
                               double delta, int max_order, const LatticeSpec& lattice) {
    if (max_order > 4) throw DomainError("check_symbol_class: max_order must be <= 4");
    ClassReport rep;
    rep.rho = rho;
    rep.delta = delta;
    rep.max_order = max_order;

    const auto xs = lattice.x_points();
    const auto xis = lattice.xi_points();
    Pt hx = Pt::Ones(), hxi = Pt::Ones();
    for (int ax = 0; ax < a.d; ++ax) {
        hx[ax] = lattice.x_step(ax);
        hxi[ax] = lattice.xi_step(ax);
    }

    std::vector<std::array<int, 2>> indices;
    for (int i = 0; i <= max_order; ++i) {
        if (a.d == 1) {
            indices.push_back({i, 0});
        } else {
            for (int j = 0; i + j <= max_order; ++j) indices.push_back({i, j});
        }
    }

    for (const auto& alpha : indices) {
        for (const auto& beta : indices) {
            if (total(alpha) + total(beta) > max_order) continue;
            ClassEntry entry;
            entry.alpha = alpha;
            entry.beta = beta;
            std::vector<std::pair<double, double>> samples;
            samples.reserve(xs.size() * xis.size());
            for (const auto& x : xs) {
                for (const auto& xi : xis) {
                    const Complex der = fd_partial(a, alpha, beta, x, xi, hx, hxi);
                    const double bound =
                        eval_weight(omega0, x, xi) *
                        std::pow(bracket(xi, a.d), -rho * total(beta) + delta * total(alpha));
                    const double ratio = std::abs(der) / bound;
                    if (!std::isfinite(ratio)) throw DomainError("check_symbol_class: non-finite ratio");
                    entry.sup_ratio = std::max(entry.sup_ratio, ratio);
                    double r = 0.0;
                    for (int ax = 0; ax < a.d; ++ax) r += xi[ax] * xi[ax];
                    samples.emplace_back(std::sqrt(r), ratio);
                }
            }
            entry.bounded = shell_bounded(samples, &entry.shell_slope);
            rep.entries.push_back(entry);
        }
    }
    return rep;
}

namespace {

std::vector<Pt> frequency_probe(int d, double r_lo, double r_hi, int n_radial, int n_angular) {
    std::vector<Pt> pts;
    if (!(r_hi > r_lo) || n_radial < 2) throw DomainError("empty frequency probe set");
    for (int i = 0; i < n_radial; ++i) {
        const double r = r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / (n_radial - 1));
        if (d == 1) {
            pts.emplace_back(r, 0.0);
            pts.emplace_back(-r, 0.0);
        } else {
            for (int j = 0; j < n_angular; ++j) {
                const double th = kTwoPi * j / n_angular;
                pts.emplace_back(r * std::cos(th), r * std::sin(th));
            }
        }
    }
    return pts;
}

}  // namespace

double ellipticity_margin(const SymbolSpec& a, const WeightSpec& omega0,
                          const std::vector<Pt>& x_probe, double R, double xi_max, int n_radial,
                          int n_angular) {
    if (x_probe.empty()) throw DomainError("ellipticity_margin: empty x probe set");
    const auto xi_pts = frequency_probe(a.d, R, 0.9 * xi_max, n_radial, n_angular);
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& x : x_probe)
        for (const auto& xi : xi_pts)
            margin = std::min(margin, std::abs(a.eval(x, xi)) / eval_weight(omega0, x, xi));
    return margin;
}

bool CharSetEstimate::empty_char() const { return characteristic_pairs().empty(); }

std::vector<std::pair<Index, int>> CharSetEstimate::characteristic_pairs() const {
    std::vector<std::pair<Index, int>> out;
    for (Index i = 0; i < static_cast<Index>(entries.size()); ++i)
        if (entries[i].characteristic) out.emplace_back(i / n_sectors, entries[i].sector);
    return out;
}

nlohmann::json CharSetEstimate::to_json() const {
    nlohmann::json j;
    j["c_min"] = c_min;
    j["params"] = {{"x_radius", params.x_radius}, {"R", params.R}, {"xi_max", params.xi_max}};
    j["note"] =
        "cone-localized ellipticity surrogate: characteristic iff min |a|/omega0 over the widened "
        "sector, |xi| >= R, falls below c_min; the Definition's (b,c,h) existence is not decided";
    nlohmann::json entries_json = nlohmann::json::array();
    for (const auto& e : entries) {
        entries_json.push_back({{"x", {e.x[0], e.x[1]}},
                                {"sector", e.sector},
                                {"margin", e.margin},
                                {"characteristic", e.characteristic}});
    }
    j["entries"] = entries_json;
    return j;
}

CharSetEstimate char_set(const SymbolSpec& a, const WeightSpec& omega0, const ConePartition& cones,
                         const std::vector<Pt>& centers, const CharParams& params) {
    if (centers.empty()) throw DomainError("char_set: no centers");
    CharSetEstimate est;
    est.params = params;
    est.n_sectors = cones.n_sectors;

    const int n_ang_total = std::max(8, params.n_angular_per_sector * cones.n_sectors);
    const auto xi_pts = frequency_probe(a.d, params.R, 0.9 * params.xi_max, params.n_radial, n_ang_total);

    // x probes: small lattices around each center
    auto x_ball = [&](const Pt& c) {
        std::vector<Pt> pts;
        const int n = std::max(1, params.n_x);
        if (a.d == 1) {
            for (int i = 0; i < n; ++i)
                pts.emplace_back(c[0] - params.x_radius + 2.0 * params.x_radius * i / std::max(1, n - 1),
                                 0.0);
        } else {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    pts.emplace_back(c[0] - params.x_radius + 2.0 * params.x_radius * i / std::max(1, n - 1),
                                     c[1] - params.x_radius + 2.0 * params.x_radius * j / std::max(1, n - 1));
        }
        return pts;
    };

    // median of |a|/omega0 over the probe lattice sets the default threshold
    double c_min;
    if (params.c_min) {
        c_min = *params.c_min;
    } else {
        std::vector<double> ratios;
        for (const auto& c : centers)
            for (const auto& x : x_ball(c))
                for (const auto& xi : xi_pts)
                    ratios.push_back(std::abs(a.eval(x, xi)) / eval_weight(omega0, x, xi));
        std::sort(ratios.begin(), ratios.end());
        c_min = 1e-3 * ratios[ratios.size() / 2];
    }
    est.c_min = c_min;

    est.entries.resize(centers.size() * cones.n_sectors);
    for (size_t ci = 0; ci < centers.size(); ++ci) {
        const auto xb = x_ball(centers[ci]);
        for (int j = 0; j < cones.n_sectors; ++j) {
            const Sector sec = cones.widened(j);
            double margin = std::numeric_limits<double>::infinity();
            long probes = 0;
            for (const auto& xi : xi_pts) {
                if (!sec.contains(xi)) continue;
                for (const auto& x : xb) {
                    margin = std::min(margin, std::abs(a.eval(x, xi)) / eval_weight(omega0, x, xi));
                    ++probes;
                }
            }
            if (probes == 0) throw InsufficientResolutionError("char_set: sector received no probes");
            CharEntry e;
            e.x = centers[ci];
            e.sector = j;
            e.margin = margin;
            e.characteristic = margin < c_min;
            est.entries[ci * cones.n_sectors + j] = e;
        }
    }
    return est;
}

// ---- composition and parametrix ----

namespace {

std::vector<std::array<int, 2>> multi_indices_upto(int d, int N) {
    std::vector<std::array<int, 2>> out;
    for (int i = 0; i <= N; ++i) {
        if (d == 1) {
            out.push_back({i, 0});
        } else {
            for (int j = 0; i + j <= N; ++j) out.push_back({i, j});
        }
    }
    return out;
}

double factorial_multi(const std::array<int, 2>& m) {
    auto fact = [](int n) {
        double f = 1.0;
        for (int i = 2; i <= n; ++i) f *= i;
        return f;
    };
    return fact(m[0]) * fact(m[1]);
}

// Broadcast pointwise multiply-accumulate: out += coef * A * B where A and B
// may carry a degenerate x extent.
void accumulate_product(ArrayXc& out, bool out_with_x, const SymbolSamples& A,
                        const SymbolSamples& B, Complex coef, const SymbolGrid& sg) {
    const Index nxi = sg.n_xi();
    const Index nx = out_with_x ? sg.field.size() : 1;
    const bool ax = A.grid.with_x, bx = B.grid.with_x;
    for (Index ix = 0; ix < nx; ++ix) {
        const Index ia = ax ? ix : 0;
        const Index ib = bx ? ix : 0;
        for (Index j = 0; j < nxi; ++j)
            out[ix * nxi + j] += coef * A.v[ia * nxi + j] * B.v[ib * nxi + j];
    }
}

}  // namespace

SymbolSpec compose_symbols(const SymbolSpec& a, const SymbolSpec& b, int N, const SymbolGrid& sg) {
    if (N < 0 || N > 4) throw DomainError("compose_symbols: N must be in [0, 4]");
    if (a.d != b.d) throw DomainError("compose_symbols: dimension mismatch");
    const bool need_x = !(a.x_independent && b.x_independent);
    SymbolGrid out_sg = sg;
    out_sg.with_x = need_x;
    // factor grids keep degenerate x extents when possible
    SymbolGrid sg_a = sg, sg_b = sg;
    sg_a.with_x = !a.x_independent;
    sg_b.with_x = !b.x_independent;

    ArrayXc acc = ArrayXc::Zero(out_sg.n_x() * out_sg.n_xi());
    for (const auto& alpha : multi_indices_upto(a.d, N)) {
        // (-i)^{|alpha|} / alpha!
        Complex coef(1.0, 0.0);
        for (int k = 0; k < total(alpha); ++k) coef *= Complex(0.0, -1.0);
        coef /= factorial_multi(alpha);
        if (total(alpha) > 0 && (b.x_independent || a.xi_independent)) continue;  // term vanishes
        const SymbolSamples A = a.partial_samples({0, 0}, alpha, sg_a);
        const SymbolSamples B = b.partial_samples(alpha, {0, 0}, sg_b);
        accumulate_product(acc, need_x, A, B, coef, out_sg);
    }
    SymbolSamples result;
    result.grid = out_sg;
    result.v = std::move(acc);
    SymbolSpec out = SymbolSpec::from_samples(std::move(result), "(" + a.id + "#" + b.id + ")_" +
                                                                     std::to_string(N));
    out.omega0 = WeightSpec::product({{a.omega0, 1.0}, {b.omega0, 1.0}});
    out.rho = std::min(a.rho, b.rho);
    return out;
}

ParametrixResult parametrix(const SymbolSpec& a, const WeightSpec& omega0, double rho,
                            const ConeRegion& region, int j_max, int N, const SymbolGrid& sg,
                            std::optional<double> c_min) {
    if (j_max < 1) throw DomainError("parametrix: j_max must be >= 1");
    const double mu = rho - a.delta;
    const double xi_max = sg.field.nyquist();

    // precondition: cone-localized ellipticity
    std::vector<Pt> x_probe;
    if (a.x_independent) {
        x_probe.push_back(Pt::Zero());
    } else {
        const Index step = std::max<Index>(1, sg.field.size() / 32);
        for (Index k = 0; k < sg.field.size(); k += step) x_probe.push_back(sg.field.point(k));
    }
    const double margin = ellipticity_margin(a, omega0, x_probe, region.R, xi_max);
    const double threshold = c_min.value_or(1e-3);
    if (margin < threshold)
        throw DomainError("parametrix: symbol is not elliptic on the requested cone region (margin " +
                          std::to_string(margin) + " < " + std::to_string(threshold) + ")");

    // chi: smooth cutoff, 1 on {xi in Gamma, |xi| >= 2R}, 0 for |xi| <= R.
    SymbolGrid chi_sg = sg;
    chi_sg.with_x = false;
    SymbolSamples chi;
    chi.grid = chi_sg;
    chi.v.resize(chi_sg.n_xi());
    const Sector base = region.sector;
    for (Index j = 0; j < chi_sg.n_xi(); ++j) {
        const Pt xi = chi_sg.xi_point(j);
        double r = 0.0;
        for (int ax = 0; ax < sg.field.dim; ++ax) r += xi[ax] * xi[ax];
        r = std::sqrt(r);
        double radial = smoothstep_inf(r / region.R - 1.0);
        double angular = 1.0;
        if (!base.full && sg.field.dim == 2 && r > 0.0) {
            const double dist = ang_dist(std::atan2(xi[1], xi[0]), base.center);
            angular = smoothstep_inf((base.half_width * 1.5 - dist) / (base.half_width * 0.5));
        } else if (!base.full && sg.field.dim == 1) {
            angular = (base.sign > 0 ? xi[0] : -xi[0]) > 0.0 ? 1.0 : 0.0;
        }
        chi.v[j] = radial * angular;
    }
    SymbolSpec chi_sym = SymbolSpec::from_samples(chi, "chi");

    // b1 = chi / a
    SymbolGrid bsg = sg;
    bsg.with_x = !a.x_independent;
    SymbolSamples a_samp = a.sample(bsg);
    SymbolSamples b1;
    b1.grid = bsg;
    b1.v.resize(bsg.n_x() * bsg.n_xi());
    for (Index ix = 0; ix < bsg.n_x(); ++ix) {
        for (Index j = 0; j < bsg.n_xi(); ++j) {
            const Complex av = a_samp.at(ix, j);
            const double c = chi.v[j].real();
            b1.v[ix * bsg.n_xi() + j] = (c == 0.0) ? Complex(0.0, 0.0) : c / av;
        }
    }

    ParametrixResult res;
    res.order = j_max;
    res.mu = mu;
    SymbolSpec bj = SymbolSpec::from_samples(b1, "b1");
    bj.rho = rho;

    for (int j = 1; j <= j_max; ++j) {
        SymbolSpec prod = compose_symbols(bj, a, N, sg);
        // h_j = (b_j # a)_N - chi
        SymbolSamples hj = *prod.samples;
        {
            const Index nxi = sg.n_xi();
            for (Index ix = 0; ix < hj.grid.n_x(); ++ix)
                for (Index k = 0; k < nxi; ++k) hj.v[ix * nxi + k] -= chi.v[k];
        }
        SymbolSpec hsym = SymbolSpec::from_samples(hj, "h" + std::to_string(j));

        // residual report on the probed region {xi in Gamma, |xi| >= 2R}
        ResidualRow row;
        row.j = j;
        std::map<int, std::pair<double, double>> sup;  // weighted, raw
        const Index nxi = sg.n_xi();
        for (Index k = 0; k < nxi; ++k) {
            const Pt xi = sg.xi_point(k);
            double r = 0.0;
            for (int ax = 0; ax < sg.field.dim; ++ax) r += xi[ax] * xi[ax];
            r = std::sqrt(r);
            if (r < 2.0 * region.R || !(base.full || base.contains(xi))) continue;
            const int bin = static_cast<int>(std::floor(std::log2(r)));
            const double wj = std::pow(bracket(xi, sg.field.dim), static_cast<double>(j) * mu);
            double m = 0.0;
            for (Index ix = 0; ix < hj.grid.n_x(); ++ix) m = std::max(m, std::abs(hj.at(ix, k)));
            row.raw_max = std::max(row.raw_max, m);
            auto& cell = sup[bin];
            cell.first = std::max(cell.first, m * wj);
            cell.second = std::max(cell.second, m);
        }
        for (const auto& [k, s] : sup) {
            row.ks.push_back(k);
            row.sup.push_back(s.first);
            row.raw_sup.push_back(s.second);
        }
        // slope over the top annuli, skipping the outermost; a residual at the
        // roundoff floor carries no slope information
        if (row.ks.size() >= 3 && row.raw_max > 1e-12) {
            std::vector<double> ks, logs;
            const size_t last = row.ks.size() - 1;
            const size_t first = last >= 3 ? last - 3 : 0;
            for (size_t i = first; i < last; ++i) {
                if (row.sup[i] > 0.0) {
                    ks.push_back(row.ks[i]);
                    logs.push_back(std::log2(row.sup[i]));
                }
            }
            if (ks.size() >= 2) row.slope = fit_line(ks, logs).slope;
        }
        res.b.push_back(bj);
        res.h.push_back(hsym);
        res.residuals.push_back(row);

        if (j < j_max) {
            // Op(b_{j+1}) = (Op(c_j) - Op(h_j)) Op(b_j), c_j == chi
            SymbolSamples cm = *chi_sym.samples;
            SymbolSamples diff;
            diff.grid = hj.grid;
            diff.v.resize(hj.v.size());
            for (Index ix = 0; ix < hj.grid.n_x(); ++ix)
                for (Index k = 0; k < nxi; ++k)
                    diff.v[ix * nxi + k] = cm.v[k] - hj.v[ix * nxi + k];
            SymbolSpec dsym = SymbolSpec::from_samples(diff, "c-h" + std::to_string(j));
            bj = compose_symbols(dsym, bj, N, sg);
            bj.id = "b" + std::to_string(j + 1);
            bj.rho = rho;
        }
    }
    return res;
}

// ---- JSON ----

SymbolSpec SymbolSpec::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const int d = j.value("d", 1);
    if (kind == "preset") {
        const std::string name = j.at("name").get<std::string>();
        if (name == "multiplier") return multiplier_bracket(j.at("s").get<double>(), d);
        if (name == "xmultiplier")
            return xmultiplier_cos(j.value("c0", 1.0), j.value("c1", 0.5), j.value("k", 1.0), d);
        if (name == "heat") return heat_symbol();
        if (name == "directional")
            return directional(j.value("s", 1.0), j.value("theta0", 0.0), j.value("hw_inner", 0.4),
                               j.value("hw_outer", 0.8), d);
        if (name == "phase") {
            Pt x0 = Pt::Zero();
            const auto& arr = j.at("x0");
            for (size_t i = 0; i < arr.size() && i < 2; ++i) x0[static_cast<int>(i)] = arr[i].get<double>();
            return phase(x0, d);
        }
        if (name == "modulated")
            return modulated_bracket(j.value("c0", 1.0), j.value("c1", 0.5), j.value("k", 1.0),
                                     j.value("s", 2.0), d);
        throw DomainError("unknown symbol preset '" + name + "'");
    }
    throw DomainError("unknown symbol kind '" + kind + "' (array symbols load via field files)");
}

nlohmann::json SymbolSpec::to_json() const {
    return nlohmann::json{{"id", id}, {"d", d}, {"rho", rho}, {"delta", delta}};
}

}  // namespace conefront
