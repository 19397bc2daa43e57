#include "conefront/fields.hpp"

#include "conefront/fft.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace conefront {

void SampledField::validate() const {
    grid.validate();
    if (values.size() != grid.size()) throw DomainError("field values do not match grid size");
    if (!values.allFinite()) throw DomainError("field has non-finite samples");
}

Spectrum dft(const SampledField& f) {
    return Spectrum{f.grid, fft::forward_grid(f.grid, f.values)};
}

SampledField idft(const Spectrum& F) {
    return SampledField{F.grid, fft::inverse_grid(F.grid, F.values)};
}

double smoothstep_inf(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

namespace {

// Window taper with a sharper Gevrey constant than the generic smoothstep;
// the steepness sets how fast the window's own spectral tail clears high
// bracket-power probes within the Nyquist band.
double bump_taper(double t) {
    constexpr double beta = 2.5;
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-beta / t);
    const double b = std::exp(-beta / (1.0 - t));
    return a / (a + b);
}

}  // namespace

double WindowSpec::eval(double u) const {
    u = std::abs(u);
    switch (kind) {
        case Kind::Gaussian:
            return std::exp(-u * u / (2.0 * param * param));
        case Kind::RaisedCosine: {
            if (u <= param / 2.0) return 1.0;
            if (u >= param) return 0.0;
            const double c = std::cos(kPi / 2.0 * (2.0 * u / param - 1.0));
            return c * c;
        }
        case Kind::SmoothBump: {
            if (u <= param / 2.0) return 1.0;
            if (u >= param) return 0.0;
            return bump_taper(2.0 - 2.0 * u / param);
        }
    }
    return 0.0;
}

std::string WindowSpec::name() const {
    switch (kind) {
        case Kind::Gaussian:
            return "gaussian";
        case Kind::RaisedCosine:
            return "raised_cosine";
        case Kind::SmoothBump:
            return "smooth_bump";
    }
    return "?";
}

SampledField window_field(const Grid& g, const Pt& x0, const WindowSpec& w) {
    SampledField out{g, ArrayXc(g.size())};
    for (Index k = 0; k < g.size(); ++k) {
        const Pt p = g.point(k);
        double r2 = 0.0;
        for (int a = 0; a < g.dim; ++a) r2 += (p[a] - x0[a]) * (p[a] - x0[a]);
        out.values[k] = w.eval(std::sqrt(r2));
    }
    return out;
}

SampledField localize(const SampledField& f, const Pt& x0, const WindowSpec& w) {
    const double r = w.radius();
    for (int a = 0; a < f.grid.dim; ++a) {
        if (x0[a] - r < f.grid.x_min(a) || x0[a] + r > f.grid.x_max(a))
            throw DomainError("localize: window support exceeds the grid");
    }
    SampledField win = window_field(f.grid, x0, w);
    return SampledField{f.grid, f.values * win.values};
}

SampledField translate(const SampledField& f, const Pt& v) {
    std::array<Index, 2> shift{0, 0};
    for (int a = 0; a < f.grid.dim; ++a) {
        const double steps = v[a] / f.grid.spacing[a];
        const auto s = static_cast<Index>(std::llround(steps));
        if (std::abs(steps - static_cast<double>(s)) > 1e-9)
            throw DomainError("translate: offset is not grid-aligned");
        shift[a] = ((s % f.grid.shape[a]) + f.grid.shape[a]) % f.grid.shape[a];
    }
    SampledField out{f.grid, ArrayXc(f.values.size())};
    const auto& g = f.grid;
    for (Index k = 0; k < g.size(); ++k) {
        auto ij = g.unflat(k);
        const Index i0 = (ij[0] - shift[0] + g.shape[0]) % g.shape[0];
        const Index i1 = g.dim == 2 ? (ij[1] - shift[1] + g.shape[1]) % g.shape[1] : 0;
        out.values[k] = f.values[g.flat(i0, i1)];
    }
    return out;
}

GeneratorSpec GeneratorSpec::delta(const Pt& x0) {
    GeneratorSpec s;
    s.kind = Kind::Delta;
    s.x0 = x0;
    return s;
}
GeneratorSpec GeneratorSpec::heaviside(double x0) {
    GeneratorSpec s;
    s.kind = Kind::Heaviside;
    s.x0 = Pt(x0, 0.0);
    return s;
}
GeneratorSpec GeneratorSpec::power_singularity(double alpha, double x0, double cutoff_radius) {
    GeneratorSpec s;
    s.kind = Kind::PowerSingularity;
    s.alpha = alpha;
    s.x0 = Pt(x0, 0.0);
    s.cutoff_radius = cutoff_radius;
    return s;
}
GeneratorSpec GeneratorSpec::gaussian(const Pt& x0, double sigma) {
    GeneratorSpec s;
    s.kind = Kind::Gaussian;
    s.x0 = x0;
    s.sigma = sigma;
    return s;
}
GeneratorSpec GeneratorSpec::line_delta(double theta, const Pt& x0) {
    GeneratorSpec s;
    s.kind = Kind::LineDelta;
    s.theta = theta;
    s.x0 = x0;
    return s;
}
GeneratorSpec GeneratorSpec::chirp(double rate, const Pt& x0) {
    GeneratorSpec s;
    s.kind = Kind::Chirp;
    s.chirp_rate = rate;
    s.x0 = x0;
    return s;
}
GeneratorSpec GeneratorSpec::heat_parametrix(double lowcut) {
    GeneratorSpec s;
    s.kind = Kind::HeatParametrix;
    s.lowcut = lowcut;
    return s;
}

SampledField synth(const GeneratorSpec& gen, const Grid& g) {
    SampledField f{g, ArrayXc::Zero(g.size())};
    switch (gen.kind) {
        case GeneratorSpec::Kind::Delta: {
            const auto ij = g.nearest(gen.x0);
            f.values[g.flat(ij[0], ij[1])] = 1.0 / g.cell_volume();
            break;
        }
        case GeneratorSpec::Kind::Heaviside: {
            if (g.dim != 1) throw DomainError("heaviside generator is 1D");
            for (Index i = 0; i < g.shape[0]; ++i)
                f.values[i] = g.coord(0, i) >= gen.x0[0] ? 1.0 : 0.0;
            break;
        }
        case GeneratorSpec::Kind::PowerSingularity: {
            if (g.dim != 1) throw DomainError("power singularity generator is 1D");
            for (Index i = 0; i < g.shape[0]; ++i) {
                const double u = std::abs(g.coord(0, i) - gen.x0[0]);
                double env = 1.0;
                if (u >= gen.cutoff_radius) {
                    env = 0.0;
                } else if (u > gen.cutoff_radius / 2.0) {
                    env = smoothstep_inf(2.0 - 2.0 * u / gen.cutoff_radius);
                }
                // half-cell regularization keeps the exact hit finite for alpha < 0
                const double base = (gen.alpha < 0.0 && u < g.spacing[0] / 2.0) ? g.spacing[0] / 2.0 : u;
                f.values[i] = env * std::pow(base, gen.alpha);
            }
            break;
        }
        case GeneratorSpec::Kind::Gaussian: {
            for (Index k = 0; k < g.size(); ++k) {
                const Pt p = g.point(k);
                double r2 = 0.0;
                for (int a = 0; a < g.dim; ++a) r2 += (p[a] - gen.x0[a]) * (p[a] - gen.x0[a]);
                f.values[k] = std::exp(-r2 / (2.0 * gen.sigma * gen.sigma));
            }
            break;
        }
        case GeneratorSpec::Kind::LineDelta: {
            if (g.dim != 2) throw DomainError("line delta generator is 2D");
            // Normal direction restricted to multiples of pi/4 so the line is
            // grid-exact and its spectrum sits on a lattice line.
            const int oct = static_cast<int>(std::llround(gen.theta / (kPi / 4.0)));
            if (std::abs(gen.theta - oct * kPi / 4.0) > 1e-9)
                throw DomainError("line delta: theta must be a multiple of pi/4");
            const int m = ((oct % 4) + 4) % 4;  // 0: normal +x, 1: diagonal, 2: normal +y, 3: anti-diagonal
            if ((m == 1 || m == 3) && g.shape[0] != g.shape[1])
                throw DomainError("diagonal line delta needs a square grid");
            const auto ij0 = g.nearest(gen.x0);
            for (Index k = 0; k < g.size(); ++k) {
                auto ij = g.unflat(k);
                bool on;
                switch (m) {
                    case 0: on = ij[0] == ij0[0]; break;
                    case 2: on = ij[1] == ij0[1]; break;
                    case 1: on = ((ij[0] + ij[1]) % g.shape[0]) == ((ij0[0] + ij0[1]) % g.shape[0]); break;
                    default: on = (((ij[0] - ij[1]) % g.shape[0]) + g.shape[0]) % g.shape[0] ==
                                  ((((ij0[0] - ij0[1]) % g.shape[0]) + g.shape[0]) % g.shape[0]);
                }
                if (on) f.values[k] = 1.0 / g.spacing[0];
            }
            break;
        }
        case GeneratorSpec::Kind::Chirp: {
            if (g.dim != 1) throw DomainError("chirp generator is 1D");
            for (Index i = 0; i < g.shape[0]; ++i) {
                const double u = g.coord(0, i) - gen.x0[0];
                const double phase = gen.chirp_rate * u * u / 2.0;
                f.values[i] = Complex(std::cos(phase), std::sin(phase));
            }
            break;
        }
        case GeneratorSpec::Kind::HeatParametrix: {
            if (g.dim != 2) throw DomainError("heat parametrix generator is 2D");
            // Built in frequency: E^(xi, tau) = (2*pi)^{-1} chi(|.|) / (xi^2 + i tau),
            // so that a * E^ = (2*pi)^{-1} chi = F(delta_0) * chi.
            Spectrum F{g, ArrayXc::Zero(g.size())};
            const double r0 = gen.lowcut;
            for (Index k = 0; k < g.size(); ++k) {
                const Pt z = g.freq_point(k);
                const double rho = z.head(2).norm();
                if (rho <= r0) continue;
                const double chi = rho >= 2.0 * r0 ? 1.0 : smoothstep_inf(rho / r0 - 1.0);
                const Complex a(z[0] * z[0], z[1]);
                F.values[k] = chi / (kTwoPi * a);
            }
            return idft(F);
        }
    }
    return f;
}

// ---- file IO ----

nlohmann::json field_header(const SampledField& f) {
    nlohmann::json j;
    j["dim"] = f.grid.dim;
    j["shape"] = std::vector<Index>(f.grid.shape.begin(), f.grid.shape.begin() + f.grid.dim);
    j["spacing"] = std::vector<double>(f.grid.spacing.begin(), f.grid.spacing.begin() + f.grid.dim);
    j["origin"] = std::vector<double>(f.grid.origin.begin(), f.grid.origin.begin() + f.grid.dim);
    j["dtype"] = "c128";
    return j;
}

namespace {

std::string raw_path_for(const std::string& json_path) {
    auto dot = json_path.find_last_of('.');
    const std::string stem = (dot == std::string::npos) ? json_path : json_path.substr(0, dot);
    return stem + ".raw";
}

SampledField load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open field csv: " + path);
    std::vector<double> xs;
    std::vector<Complex> vs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        double x, re, im;
        char comma;
        std::istringstream ls(line);
        if (!(ls >> x >> comma >> re >> comma >> im)) throw DomainError("bad csv row: " + line);
        xs.push_back(x);
        vs.emplace_back(re, im);
    }
    if (xs.size() < 4) throw DomainError("csv field too short");
    const double h = xs[1] - xs[0];
    for (size_t i = 1; i + 1 < xs.size(); ++i)
        if (std::abs(xs[i + 1] - xs[i] - h) > 1e-9 * std::abs(h))
            throw DomainError("csv grid is not uniform");
    Grid g = Grid::make(1, {static_cast<Index>(xs.size()), 1}, {h, 1.0}, {xs[0], 0.0});
    SampledField f{g, ArrayXc(g.size())};
    for (Index i = 0; i < g.size(); ++i) f.values[i] = vs[i];
    f.validate();
    return f;
}

}  // namespace

void save_field(const SampledField& f, const std::string& json_path) {
    f.validate();
    {
        std::ofstream out(json_path);
        if (!out) throw DomainError("cannot write field header: " + json_path);
        out << field_header(f).dump(2) << "\n";
    }
    std::ofstream raw(raw_path_for(json_path), std::ios::binary);
    if (!raw) throw DomainError("cannot write field payload");
    for (Index k = 0; k < f.values.size(); ++k) {
        const double re = f.values[k].real(), im = f.values[k].imag();
        raw.write(reinterpret_cast<const char*>(&re), sizeof(double));
        raw.write(reinterpret_cast<const char*>(&im), sizeof(double));
    }
}

SampledField load_field(const std::string& path) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") return load_csv(path);
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open field header: " + path);
    nlohmann::json j;
    in >> j;
    const int dim = j.at("dim").get<int>();
    Grid g;
    g.dim = dim;
    for (int a = 0; a < dim; ++a) {
        g.shape[a] = j.at("shape")[a].get<Index>();
        g.spacing[a] = j.at("spacing")[a].get<double>();
        g.origin[a] = j.at("origin")[a].get<double>();
    }
    g.validate();
    if (j.value("dtype", "c128") != std::string("c128")) throw DomainError("unsupported dtype");
    SampledField f{g, ArrayXc(g.size())};
    std::ifstream raw(raw_path_for(path), std::ios::binary);
    if (!raw) throw DomainError("cannot open field payload for: " + path);
    for (Index k = 0; k < f.values.size(); ++k) {
        double re = 0, im = 0;
        raw.read(reinterpret_cast<char*>(&re), sizeof(double));
        raw.read(reinterpret_cast<char*>(&im), sizeof(double));
        if (!raw) throw DomainError("field payload truncated");
        f.values[k] = Complex(re, im);
    }
    f.validate();
    return f;
}

}  // namespace conefront
