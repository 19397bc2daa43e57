#include <doctest.h>

#include "conefront/coneharm.hpp"

using namespace conefront;

namespace {

Grid std_grid() { return Grid::line(1024, -20.0, 20.0); }

}  // namespace

TEST_CASE("cone partitions") {
    SUBCASE("d=1 collapses to the two half-lines") {
        const ConePartition p = make_cone_partition(1, 16);
        CHECK(p.n_sectors == 2);
        CHECK(p.base(0).contains(Pt(0.5, 0.0)));
        CHECK(p.base(1).contains(Pt(-0.5, 0.0)));
        CHECK_FALSE(p.base(0).contains(Pt(-0.5, 0.0)));
        CHECK_FALSE(p.base(0).contains(Pt(0.0, 0.0)));
    }
    SUBCASE("d=2 quadrants: (1,1) sits in sector [0, pi/2)") {
        const ConePartition p = make_cone_partition(2, 4, 1.0);
        CHECK(p.base(0).contains(Pt(1.0, 1.0)));
        CHECK_FALSE(p.base(1).contains(Pt(1.0, 1.0)));
        CHECK(p.base(1).contains(Pt(-1.0, 1.0)));
        CHECK(p.base(2).contains(Pt(-1.0, -1.0)));
        CHECK(p.base(3).contains(Pt(1.0, -1.0)));
    }
    SUBCASE("widened sectors: n=16, lambda=1.5 spans 33.75 degrees") {
        const ConePartition p = make_cone_partition(2, 16, 1.5);
        const Sector w = p.widened(0);
        CHECK(2.0 * w.half_width * 180.0 / kPi == doctest::Approx(33.75));
        CHECK(w.center == doctest::Approx(kPi / 16.0));
        // strictly contains the base sector
        const Sector b = p.base(0);
        CHECK(w.half_width > b.half_width);
        CHECK(w.center == doctest::Approx(b.center));
    }
    SUBCASE("every nonzero frequency lands in exactly one base sector") {
        const ConePartition p = make_cone_partition(2, 8, 1.0);
        const Grid g = Grid::square(32, -8.0, 8.0);
        for (Index k = 0; k < g.size(); ++k) {
            const Pt z = g.freq_point(k);
            if (z.norm() == 0.0) continue;
            int hits = 0;
            for (int j = 0; j < 8; ++j) hits += p.base(j).contains(z) ? 1 : 0;
            CHECK(hits == 1);
        }
    }
    SUBCASE("invalid counts") {
        CHECK_THROWS_AS(make_cone_partition(2, 3, 1.0), DomainError);
        CHECK_THROWS_AS(make_cone_partition(2, 8, 2.5), DomainError);
    }
}

TEST_CASE("cone seminorm profiles match the spec oracles") {
    const Grid g = std_grid();
    const WeightSpec one = WeightSpec::constant(1.0, 1);
    const ConePartition cones = make_cone_partition(1, 2);
    const WindowSpec win = WindowSpec::raised_cosine(2.0);

    SUBCASE("delta: q=inf profile is flat at (2pi)^{-1/2}") {
        const SampledField f = synth(GeneratorSpec::delta(Pt::Zero()), g);
        const Spectrum F = dft(localize(f, Pt::Zero(), win));
        for (int j = 0; j < 2; ++j) {
            const DyadicProfile p = cone_seminorm_profile(F, cones.base(j), one, kInf, Pt::Zero());
            REQUIRE(p.slope.has_value());
            CHECK(std::abs(*p.slope) <= 0.05);
            for (int k = p.k_min; k <= p.k_max; ++k)
                CHECK(p.value(k) == doctest::Approx(1.0 / std::sqrt(kTwoPi)).epsilon(1e-6));
        }
    }
    SUBCASE("localized heaviside: q=1 slope ~ 0 with w=1, ~ -1 with w=bracket^{-1}") {
        const SampledField f = synth(GeneratorSpec::heaviside(0.0), g);
        const Spectrum F = dft(localize(f, Pt::Zero(), win));
        const DyadicProfile p0 = cone_seminorm_profile(F, cones.base(0), one, 1.0, Pt::Zero());
        REQUIRE(p0.slope.has_value());
        CHECK(*p0.slope >= -0.15);
        CHECK(*p0.slope <= 0.15);
        const DyadicProfile p1 = cone_seminorm_profile(F, cones.base(0),
                                                       WeightSpec::japanese_bracket(-1.0, 1), 1.0,
                                                       Pt::Zero());
        REQUIRE(p1.slope.has_value());
        CHECK(*p1.slope >= -1.15);
        CHECK(*p1.slope <= -0.85);
    }
    SUBCASE("partition completeness: sector q-th powers sum to the unrestricted seminorm") {
        const Grid g2 = Grid::square(64, -16.0, 16.0);
        SampledField f = synth(GeneratorSpec::gaussian(Pt(1.0, -2.0), 1.0), g2);
        f.values += 0.3 * synth(GeneratorSpec::line_delta(0.0, Pt(2.0, 0.0)), g2).values;
        const Spectrum F = dft(f);
        const ConePartition p2 = make_cone_partition(2, 8, 1.0);
        const double q = 2.0;
        double sum_q = 0.0;
        for (int j = 0; j < 8; ++j) {
            const DyadicProfile pj = cone_seminorm_profile(F, p2.base(j), one, q, Pt::Zero());
            sum_q += std::pow(full_seminorm(pj), q);
        }
        const DyadicProfile pall =
            cone_seminorm_profile(F, ConePartition::everything(2), one, q, Pt::Zero());
        const double full_q = std::pow(full_seminorm(pall), q);
        CHECK(std::abs(sum_q - full_q) <= 1e-10 * full_q);
    }
    SUBCASE("full_seminorm recombines the profile exactly for q < inf") {
        const SampledField f = synth(GeneratorSpec::gaussian(Pt::Zero(), 1.0), g);
        const Spectrum F = dft(f);
        const DyadicProfile p = cone_seminorm_profile(F, cones.base(0), one, 1.0, Pt::Zero());
        double direct = 0.0;
        for (Index k = 0; k < g.size(); ++k) {
            const Pt z = F.grid.freq_point(k);
            if (z[0] <= 0.0) continue;
            direct += F.grid.freq_spacing(0) * std::abs(F.values[k]);
        }
        CHECK(full_seminorm(p) == doctest::Approx(direct).epsilon(1e-12));
    }
    SUBCASE("too few annuli raise insufficient-resolution") {
        const Grid tiny = Grid::line(4, -1.0, 1.0);
        SampledField f{tiny, ArrayXc::Constant(tiny.size(), 1.0)};
        const Spectrum F = dft(f);
        CHECK_THROWS_AS(cone_seminorm_profile(F, cones.base(0), one, 1.0, Pt::Zero()),
                        InsufficientResolutionError);
    }
}

TEST_CASE("stft") {
    const Grid g = std_grid();

    SUBCASE("zero field gives zero coefficients and a regular profile") {
        SampledField f{g, ArrayXc::Zero(g.size())};
        const GaborCoefficients G = stft(f, WindowSpec::gaussian(1.0), 16);
        CHECK(G.coeffs.abs().maxCoeff() == 0.0);
        const DyadicProfile p = mod_seminorm_profile(G, make_cone_partition(1, 2).base(0),
                                                     WeightSpec::constant(1.0, 1), kInf, 1.0,
                                                     ModFlavor::M);
        CHECK_FALSE(p.slope.has_value());
        CHECK(profile_regular(p));
    }
    SUBCASE("pure tone concentrates at xi0 independent of x") {
        const double xi0 = g.freq(0, 640);  // on the frequency grid
        SampledField f{g, ArrayXc(g.size())};
        for (Index k = 0; k < g.size(); ++k) {
            const double x = g.coord(0, k);
            f.values[k] = Complex(std::cos(xi0 * x), std::sin(xi0 * x));
        }
        const GaborCoefficients G = stft(f, WindowSpec::gaussian(1.0), 64);
        for (Index m = 0; m < G.n_positions(); ++m) {
            // peak of |V| over xi sits within dxi of xi0
            Index best = 0;
            double best_v = -1.0;
            for (Index sub = 0; sub < G.n_freqs(); ++sub) {
                const double v = std::abs(G.at(m, sub));
                if (v > best_v) {
                    best_v = v;
                    best = sub;
                }
            }
            CHECK(std::abs(G.freq_at(best)[0] - xi0) <= G.grid.freq_spacing(0) + 1e-12);
            // closed-form gaussian STFT magnitude: |V| peaks at (2pi)^{-1/2} * ||phi||_1-ish;
            // check x-independence of the peak instead of absolute scale
            CHECK(best_v > 0.1);
        }
    }
    SUBCASE("disjoint supports give exactly zero coefficients") {
        SampledField f = synth(GeneratorSpec::gaussian(Pt::Zero(), 0.3), g);
        // kill the tail so the support is truly inside [-1, 1]
        for (Index k = 0; k < g.size(); ++k)
            if (std::abs(g.coord(0, k)) > 1.0) f.values[k] = 0.0;
        const GaborCoefficients G = stft(f, WindowSpec::raised_cosine(1.0), 128);
        for (Index m = 0; m < G.n_positions(); ++m) {
            if (std::abs(G.positions[m][0] - 5.0) > 0.01) continue;
            for (Index sub = 0; sub < G.n_freqs(); sub += 17) CHECK(std::abs(G.at(m, sub)) == 0.0);
        }
    }
    SUBCASE("STFT decay for compactly supported fields (x-slope <= -2 beyond support)") {
        SampledField f = synth(GeneratorSpec::power_singularity(0.5, 0.0, 2.0), g);
        const GaborCoefficients G = stft(f, WindowSpec::gaussian(0.5), 8);
        std::vector<double> lx, lv;
        for (Index m = 0; m < G.n_positions(); ++m) {
            const double x = G.positions[m][0];
            if (std::abs(x) < 4.5 || std::abs(x) > 16.0) continue;
            double sup = 0.0;
            for (Index sub = 0; sub < G.n_freqs(); ++sub) sup = std::max(sup, std::abs(G.at(m, sub)));
            if (sup > 0.0) {
                lx.push_back(std::log2(std::hypot(1.0, x)));
                lv.push_back(std::log2(sup));
            }
        }
        REQUIRE(lx.size() >= 4);
        CHECK(fit_line(lx, lv).slope <= -2.0);
    }
}

TEST_CASE("modulation-space profiles") {
    const Grid g = std_grid();
    const ConePartition cones = make_cone_partition(1, 2);
    const WeightSpec one = WeightSpec::constant(1.0, 1);

    SUBCASE("delta: flavor M, p=inf, q=1 gives a flat profile") {
        const SampledField f = synth(GeneratorSpec::delta(Pt::Zero()), g);
        const GaborCoefficients G = stft(f, WindowSpec::raised_cosine(2.0), 16);
        const DyadicProfile p = mod_seminorm_profile(G, cones.base(0), one, kInf, 1.0, ModFlavor::M);
        REQUIRE(p.slope.has_value());
        CHECK(std::abs(*p.slope - 1.0) <= 0.1);  // q=1 sums ~2^k flat maxima per annulus
        const DyadicProfile pinf =
            mod_seminorm_profile(G, cones.base(0), one, kInf, kInf, ModFlavor::M);
        REQUIRE(pinf.slope.has_value());
        CHECK(std::abs(*pinf.slope) <= 0.05);
    }
    SUBCASE("gaussian with bracket^10 weight still decays steeply in every flavor") {
        const SampledField f = synth(GeneratorSpec::gaussian(Pt::Zero(), 1.0), g);
        const GaborCoefficients G = stft(f, WindowSpec::gaussian(1.0), 32);
        const WeightSpec w10 = WeightSpec::japanese_bracket(10.0, 1);
        for (auto flavor : {ModFlavor::M, ModFlavor::W}) {
            const DyadicProfile p = mod_seminorm_profile(G, cones.base(0), w10, 1.0, 1.0, flavor);
            REQUIRE(p.slope.has_value());
            CHECK(*p.slope <= -3.0);
        }
    }
    SUBCASE("window robustness: gaussian vs raised cosine verdicts agree") {
        std::vector<SampledField> corpus;
        corpus.push_back(synth(GeneratorSpec::delta(Pt::Zero()), g));
        corpus.push_back(synth(GeneratorSpec::gaussian(Pt::Zero(), 1.0), g));
        corpus.push_back(synth(GeneratorSpec::heaviside(0.0), g));
        for (const auto& f : corpus) {
            const GaborCoefficients Ga = stft(f, WindowSpec::gaussian(1.0), 32);
            const GaborCoefficients Gb = stft(f, WindowSpec::raised_cosine(2.0), 32);
            for (int j = 0; j < 2; ++j) {
                const DyadicProfile pa =
                    mod_seminorm_profile(Ga, cones.base(j), one, kInf, 1.0, ModFlavor::M);
                const DyadicProfile pb =
                    mod_seminorm_profile(Gb, cones.base(j), one, kInf, 1.0, ModFlavor::M);
                CHECK(profile_regular(pa) == profile_regular(pb));
                if (pa.slope && pb.slope) {
                    // saturated steep decay is window-limited, so compare in
                    // the verdict-relevant band only
                    const double ca = std::clamp(*pa.slope, -2.0, 2.0);
                    const double cb = std::clamp(*pb.slope, -2.0, 2.0);
                    CHECK(std::abs(ca - cb) <= 0.3);
                }
            }
        }
    }
}
