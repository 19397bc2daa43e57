#include <doctest.h>

#include "conefront/fields.hpp"

#include <random>

using namespace conefront;

namespace {

Grid std_grid_1d() { return Grid::line(1024, -20.0, 20.0); }

}  // namespace

TEST_CASE("gaussian is its own transform under the (2pi)^{-d/2} normalization") {
    const Grid g = std_grid_1d();
    SampledField f = synth(GeneratorSpec::gaussian(Pt::Zero(), 1.0), g);
    const Spectrum F = dft(f);
    double max_err = 0.0;
    for (Index k = 0; k < g.size(); ++k) {
        const double xi = F.grid.freq(0, k);
        max_err = std::max(max_err, std::abs(F.values[k] - Complex(std::exp(-xi * xi / 2.0), 0.0)));
    }
    CHECK(max_err <= 1e-8);
}

TEST_CASE("discrete delta transforms to the constant (2pi)^{-1/2}") {
    const Grid g = std_grid_1d();
    SampledField f = synth(GeneratorSpec::delta(Pt::Zero()), g);
    const Spectrum F = dft(f);
    const double c = 1.0 / std::sqrt(kTwoPi);
    for (Index k = 0; k < g.size(); k += 97) CHECK(std::abs(F.values[k]) == doctest::Approx(c).epsilon(1e-10));
}

TEST_CASE("shifted delta gains the phase e^{-i x0 xi}, modulus unchanged") {
    const Grid g = std_grid_1d();
    const double x0 = g.coord(0, 600);
    SampledField f = synth(GeneratorSpec::delta(Pt(x0, 0.0)), g);
    const Spectrum F = dft(f);
    const double c = 1.0 / std::sqrt(kTwoPi);
    for (Index k = 100; k < g.size(); k += 131) {
        const double xi = F.grid.freq(0, k);
        const Complex expect = c * Complex(std::cos(x0 * xi), -std::sin(x0 * xi));
        CHECK(std::abs(F.values[k] - expect) <= 1e-12);
        CHECK(std::abs(std::abs(F.values[k]) - c) <= 1e-12);
    }
}

TEST_CASE("idft round-trips dft to 1e-12 relative") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    for (const Grid& g : {Grid::line(256, -20.0, 20.0), Grid::square(32, -8.0, 8.0)}) {
        SampledField f{g, ArrayXc(g.size())};
        for (Index k = 0; k < g.size(); ++k) f.values[k] = Complex(nd(rng), nd(rng));
        const SampledField back = idft(dft(f));
        const double num = (back.values - f.values).abs().maxCoeff();
        const double den = f.values.abs().maxCoeff();
        CHECK(num / den <= 1e-12);
    }
}

TEST_CASE("Plancherel holds to 1e-10 relative on zoo fields") {
    const Grid g = std_grid_1d();
    const Grid g2 = Grid::square(64, -16.0, 16.0);
    std::vector<SampledField> corpus;
    corpus.push_back(synth(GeneratorSpec::delta(Pt::Zero()), g));
    corpus.push_back(synth(GeneratorSpec::heaviside(0.0), g));
    corpus.push_back(synth(GeneratorSpec::gaussian(Pt(2.0, 0.0), 1.5), g));
    corpus.push_back(synth(GeneratorSpec::power_singularity(0.5, 1.0), g));
    corpus.push_back(synth(GeneratorSpec::chirp(3.0), g));
    corpus.push_back(synth(GeneratorSpec::line_delta(0.0), g2));
    corpus.push_back(synth(GeneratorSpec::line_delta(kPi / 4.0), g2));
    corpus.push_back(synth(GeneratorSpec::heat_parametrix(1.0), g2));
    for (const auto& f : corpus) {
        const double a = f.l2_mass();
        const double b = dft(f).l2_mass();
        CHECK(std::abs(a - b) <= 1e-10 * a);
    }
}

TEST_CASE("dft is linear to machine precision") {
    const Grid g = Grid::line(128, -10.0, 10.0);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    SampledField f{g, ArrayXc(g.size())}, h{g, ArrayXc(g.size())};
    for (Index k = 0; k < g.size(); ++k) {
        f.values[k] = Complex(nd(rng), nd(rng));
        h.values[k] = Complex(nd(rng), nd(rng));
    }
    const Complex alpha(0.7, -1.3);
    SampledField combo{g, alpha * f.values + h.values};
    const ArrayXc lhs = dft(combo).values;
    const ArrayXc rhs = alpha * dft(f).values + dft(h).values;
    CHECK((lhs - rhs).abs().maxCoeff() <= 1e-12 * rhs.abs().maxCoeff());
}

TEST_CASE("localize basics") {
    const Grid g = std_grid_1d();
    const WindowSpec w = WindowSpec::raised_cosine(2.0);

    SUBCASE("constant field localizes to the window itself") {
        SampledField ones{g, ArrayXc::Constant(g.size(), 1.0)};
        const Pt x0(3.0, 0.0);
        const SampledField loc = localize(ones, x0, w);
        const SampledField win = window_field(g, x0, w);
        CHECK((loc.values - win.values).abs().maxCoeff() <= 1e-15);
    }
    SUBCASE("heaviside far from the jump looks like the window") {
        SampledField f = synth(GeneratorSpec::heaviside(0.0), g);
        const Pt x0(10.0, 0.0);
        const SampledField loc = localize(f, x0, w);
        const SampledField win = window_field(g, x0, w);
        CHECK((loc.values - win.values).abs().maxCoeff() <= 1e-15);
    }
    SUBCASE("localizing twice equals localizing with the squared window") {
        SampledField f = synth(GeneratorSpec::gaussian(Pt::Zero(), 2.0), g);
        const Pt x0(1.0, 0.0);
        const SampledField twice = localize(localize(f, x0, w), x0, w);
        SampledField win = window_field(g, x0, w);
        const ArrayXc expect = f.values * win.values.square();
        CHECK((twice.values - expect).abs().maxCoeff() <= 1e-15);
    }
    SUBCASE("support falling off the grid is a domain error") {
        SampledField f{g, ArrayXc::Constant(g.size(), 1.0)};
        CHECK_THROWS_AS(localize(f, Pt(19.5, 0.0), w), DomainError);
    }
}

TEST_CASE("localize commutes with grid-aligned translation") {
    const Grid g = std_grid_1d();
    SampledField f = synth(GeneratorSpec::power_singularity(0.5, -2.0), g);
    const WindowSpec w = WindowSpec::smooth_bump(2.0);
    const double v = 32.0 * g.spacing[0];
    const Pt x0(-2.0, 0.0);
    const SampledField lhs = localize(translate(f, Pt(v, 0.0)), Pt(x0[0] + v, 0.0), w);
    const SampledField rhs = translate(localize(f, x0, w), Pt(v, 0.0));
    CHECK((lhs.values - rhs.values).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("generator basics") {
    const Grid g = std_grid_1d();
    SUBCASE("delta carries unit mass as a single 1/h sample") {
        SampledField f = synth(GeneratorSpec::delta(Pt::Zero()), g);
        const auto ij = g.nearest(Pt::Zero());
        CHECK(f.values[g.flat(ij[0], ij[1])].real() == doctest::Approx(1.0 / g.spacing[0]));
        CHECK(f.values.abs().sum() == doctest::Approx(1.0 / g.spacing[0]));
    }
    SUBCASE("heaviside steps at the requested point") {
        SampledField f = synth(GeneratorSpec::heaviside(0.0), g);
        const auto i0 = g.nearest(Pt::Zero())[0];
        CHECK(f.values[i0 - 1].real() == 0.0);
        CHECK(f.values[i0].real() == 1.0);
        CHECK(f.values[g.shape[0] - 1].real() == 1.0);
    }
}

TEST_CASE("heat parametrix satisfies Op(a)E = delta + smooth on the grid") {
    const Grid g = Grid::make(2, {64, 64}, {kPi / 64.0, kPi / 64.0}, {-kPi / 2.0, -kPi / 2.0});
    SampledField E = synth(GeneratorSpec::heat_parametrix(1.0), g);
    // multiply the spectrum by the heat symbol directly
    Spectrum F = dft(E);
    for (Index k = 0; k < g.size(); ++k) {
        const Pt z = g.freq_point(k);
        F.values[k] *= Complex(z[0] * z[0], z[1]);
    }
    const Spectrum D = dft(synth(GeneratorSpec::delta(Pt::Zero()), g));
    double max_out = 0.0;
    for (Index k = 0; k < g.size(); ++k) {
        const Pt z = g.freq_point(k);
        if (z.norm() < 4.0) continue;  // low-frequency cutoff region
        max_out = std::max(max_out, std::abs(F.values[k] - D.values[k]));
    }
    CHECK(max_out <= 1e-10);
}

TEST_CASE("field files round-trip") {
    const Grid g = Grid::line(64, -4.0, 4.0);
    SampledField f = synth(GeneratorSpec::gaussian(Pt(0.5, 0.0), 0.7), g);
    const std::string path = "conefront_test_field.json";
    save_field(f, path);
    const SampledField back = load_field(path);
    CHECK(back.grid.same_geometry(g));
    CHECK((back.values - f.values).abs().maxCoeff() == 0.0);
    std::remove(path.c_str());
    std::remove("conefront_test_field.raw");
}
