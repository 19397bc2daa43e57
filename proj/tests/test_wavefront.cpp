#include <doctest.h>

#include "conefront/wavefront.hpp"

#include <algorithm>
#include <set>

using namespace conefront;

namespace {

Grid std_grid() { return Grid::line(1024, -20.0, 20.0); }

using PairSet = std::set<std::pair<double, int>>;

PairSet singular_set(const WavefrontEstimate& est) {
    PairSet s;
    for (const auto& [c, j] : est.singular_pairs()) s.insert({est.centers[c][0], j});
    return s;
}

void singular_set_2d(const WavefrontEstimate& est, std::set<std::tuple<double, double, int>>* out) {
    for (const auto& [c, j] : est.singular_pairs())
        out->insert({est.centers[c][0], est.centers[c][1], j});
}

}  // namespace

TEST_CASE("wavefront_set spec examples") {
    const Grid g = std_grid();
    const WeightSpec one = WeightSpec::constant(1.0, 1);
    const DetectorConfig rc = DetectorConfig::for_grid(g, WindowSpec::raised_cosine(2.0), 2);

    SUBCASE("gaussian with bracket^4, q=1: empty") {
        const DetectorConfig sb = DetectorConfig::for_grid(g, WindowSpec::smooth_bump(8.0), 2);
        const auto est = wavefront_set(synth(GeneratorSpec::gaussian(Pt::Zero(), 1.0), g),
                                       WeightSpec::japanese_bracket(4.0, 1), 1.0, sb);
        CHECK(est.empty_wf());
    }
    SUBCASE("delta: q=inf empty, q=1 both sectors at x0 only") {
        const SampledField f = synth(GeneratorSpec::delta(Pt::Zero()), g);
        CHECK(wavefront_set(f, one, kInf, rc).empty_wf());
        const auto est = wavefront_set(f, one, 1.0, rc);
        CHECK(singular_set(est) == PairSet{{0.0, 0}, {0.0, 1}});
    }
    SUBCASE("heaviside: q=1 w=1 gives {0} x {+,-}") {
        const SampledField f = synth(GeneratorSpec::heaviside(0.0), g);
        CHECK(singular_set(wavefront_set(f, one, 1.0, rc)) == PairSet{{0.0, 0}, {0.0, 1}});
        CHECK(wavefront_set(f, WeightSpec::japanese_bracket(-1.0, 1), 1.0, rc).empty_wf());
    }
}

TEST_CASE("sup/inf type wave-front sets") {
    const Grid g = std_grid();
    const DetectorConfig cfg = DetectorConfig::for_grid(g, WindowSpec::raised_cosine(2.0), 2);
    const SampledField heavi = synth(GeneratorSpec::heaviside(0.0), g);
    // member 0 judges the step regular, member 1 singular
    const std::vector<WeightSpec> ws{WeightSpec::japanese_bracket(-2.0, 1),
                                     WeightSpec::japanese_bracket(0.0, 1)};
    const std::vector<double> qs{1.0, 1.0};

    SUBCASE("single-element arrays reduce to wavefront_set") {
        const auto a = wavefront_sup(heavi, {ws[1]}, {1.0}, cfg);
        const auto b = wavefront_set(heavi, ws[1], 1.0, cfg);
        CHECK(singular_set(a) == singular_set(b));
        const auto c = wavefront_inf(heavi, {ws[1]}, {1.0}, cfg);
        CHECK(singular_set(c) == singular_set(b));
    }
    SUBCASE("sup takes the union, inf the intersection") {
        CHECK(singular_set(wavefront_sup(heavi, ws, qs, cfg)) == PairSet{{0.0, 0}, {0.0, 1}});
        CHECK(wavefront_inf(heavi, ws, qs, cfg).empty_wf());
    }
    SUBCASE("the more demanding weight dominates the sup") {
        const std::vector<WeightSpec> ws2{WeightSpec::japanese_bracket(0.0, 1),
                                          WeightSpec::japanese_bracket(2.0, 1)};
        const DetectorConfig sb = DetectorConfig::for_grid(g, WindowSpec::smooth_bump(8.0), 2);
        const auto sup = wavefront_sup(heavi, ws2, qs, sb);
        const auto hard = wavefront_set(heavi, ws2[1], 1.0, sb);
        CHECK(singular_set(sup) == singular_set(hard));
    }
    SUBCASE("gaussian stays empty for any polynomial array") {
        const SampledField f = synth(GeneratorSpec::gaussian(Pt::Zero(), 1.0), g);
        CHECK(wavefront_sup(f, ws, qs, cfg).empty_wf());
        CHECK(wavefront_inf(f, ws, qs, cfg).empty_wf());
    }
}

TEST_CASE("classical wave-front surrogate") {
    // j_max = 8 probes need the bump window and a wider frequency band
    const Grid g = Grid::line(4096, -20.0, 20.0);
    const DetectorConfig cfg = DetectorConfig::for_grid(g, WindowSpec::smooth_bump(4.0), 2);

    CHECK(classical_wf(synth(GeneratorSpec::gaussian(Pt::Zero(), 1.0), g), 8, cfg).empty_wf());
    CHECK(singular_set(classical_wf(synth(GeneratorSpec::delta(Pt::Zero()), g), 8, cfg)) ==
          PairSet{{0.0, 0}, {0.0, 1}});
    CHECK(singular_set(classical_wf(synth(GeneratorSpec::heaviside(0.0), g), 8, cfg)) ==
          PairSet{{0.0, 0}, {0.0, 1}});
    // |x|^{1/2} is Hoelder but not smooth: the classical detector sees it
    CHECK(singular_set(classical_wf(synth(GeneratorSpec::power_singularity(0.5, 0.0), g), 8, cfg)) ==
          PairSet{{0.0, 0}, {0.0, 1}});
}

TEST_CASE("translation covariance with grid-aligned shifts") {
    const Grid g = std_grid();
    const DetectorConfig cfg = DetectorConfig::for_grid(g, WindowSpec::raised_cosine(2.0), 2);
    // compactly supported singular content (translate is circular, so fields
    // with boundary content would wrap singularities into the probed region)
    SampledField f = synth(GeneratorSpec::delta(Pt::Zero()), g);
    f.values += synth(GeneratorSpec::power_singularity(-0.25, -6.09375, 2.0), g).values;

    // shift by two center steps so the center lattice maps onto itself
    const double step = cfg.centers[1][0] - cfg.centers[0][0];
    const double v = 2.0 * step;
    REQUIRE(std::abs(v / g.spacing[0] - std::llround(v / g.spacing[0])) < 1e-9);

    const auto base = wavefront_set(f, WeightSpec::constant(1.0, 1), 1.0, cfg);
    const auto shifted =
        wavefront_set(translate(f, Pt(v, 0.0)), WeightSpec::constant(1.0, 1), 1.0, cfg);
    auto rounded = [](const PairSet& s) {
        PairSet r;
        for (auto& [x, j] : s) r.insert({std::round(x * 1e6) / 1e6, j});
        return r;
    };
    PairSet expect;
    for (const auto& [x, j] : singular_set(base)) expect.insert({x + v, j});
    REQUIRE_FALSE(expect.empty());
    CHECK(rounded(singular_set(shifted)) == rounded(expect));
}

TEST_CASE("monotonicity: larger exponent and smaller weight shrink the estimate") {
    const Grid g = std_grid();
    const DetectorConfig cfg = DetectorConfig::for_grid(g, WindowSpec::raised_cosine(2.0), 2);
    std::vector<SampledField> corpus;
    corpus.push_back(synth(GeneratorSpec::delta(Pt::Zero()), g));
    corpus.push_back(synth(GeneratorSpec::heaviside(0.0), g));
    corpus.push_back(synth(GeneratorSpec::power_singularity(0.5, 0.0), g));
    corpus.push_back(synth(GeneratorSpec::gaussian(Pt::Zero(), 1.0), g));

    const WeightSpec w0 = WeightSpec::constant(1.0, 1);
    const WeightSpec wm1 = WeightSpec::japanese_bracket(-1.0, 1);
    for (const auto& f : corpus) {
        const auto big = singular_set(wavefront_set(f, w0, 1.0, cfg));
        // q: 1 <= inf, same weight
        const auto small_q = singular_set(wavefront_set(f, w0, kInf, cfg));
        CHECK(std::includes(big.begin(), big.end(), small_q.begin(), small_q.end()));
        // weight: <xi>^{-1} <= C * 1, same q
        const auto small_w = singular_set(wavefront_set(f, wm1, 1.0, cfg));
        CHECK(std::includes(big.begin(), big.end(), small_w.begin(), small_w.end()));
    }
}

TEST_CASE("microlocality of smooth cutoffs, exact cases") {
    const Grid g = std_grid();
    const DetectorConfig cfg = DetectorConfig::for_grid(g, WindowSpec::raised_cosine(2.0), 2);
    const WeightSpec one = WeightSpec::constant(1.0, 1);
    SampledField f = synth(GeneratorSpec::heaviside(0.0), g);

    SUBCASE("cutoff vanishing at the jump removes it") {
        const SampledField psi = window_field(g, Pt(10.0, 0.0), WindowSpec::smooth_bump(4.0));
        const SampledField pf{g, f.values * psi.values};
        CHECK(wavefront_set(pf, one, 1.0, cfg).empty_wf());
    }
    SUBCASE("cutoff equal to 1 near the jump keeps exactly it") {
        const SampledField psi = window_field(g, Pt::Zero(), WindowSpec::smooth_bump(6.0));
        const SampledField pf{g, f.values * psi.values};
        CHECK(singular_set(wavefront_set(pf, one, 1.0, cfg)) ==
              singular_set(wavefront_set(f, one, 1.0, cfg)));
    }
}

TEST_CASE("rotation equivariance in d=2 on the line delta") {
    const Grid g = Grid::square(128, -16.0, 16.0);
    DetectorConfig cfg = DetectorConfig::for_grid(g, WindowSpec::raised_cosine(2.0), 8);
    const WeightSpec one = WeightSpec::constant(1.0, 2);

    const auto a = wavefront_set(synth(GeneratorSpec::line_delta(0.0), g), one, 1.0, cfg);
    const auto b = wavefront_set(synth(GeneratorSpec::line_delta(kPi / 2.0), g), one, 1.0, cfg);

    std::set<std::tuple<double, double, int>> sa, sb, sa_rot;
    singular_set_2d(a, &sa);
    singular_set_2d(b, &sb);
    REQUIRE_FALSE(sa.empty());
    // rotate by +90 degrees: (x1, x2) -> (-x2, x1), sector j -> j + 2 (mod 8)
    for (const auto& [x1, x2, j] : sa) sa_rot.insert({-x2, x1, (j + 2) % 8});
    CHECK(sa_rot == sb);
}

TEST_CASE("flavor equality: FL, M and W agree on the corpus") {
    const Grid g = std_grid();
    DetectorConfig cfg = DetectorConfig::for_grid(g, WindowSpec::raised_cosine(2.0), 2);
    const WeightSpec one = WeightSpec::constant(1.0, 1);
    std::vector<SampledField> corpus;
    corpus.push_back(synth(GeneratorSpec::delta(Pt::Zero()), g));
    corpus.push_back(synth(GeneratorSpec::heaviside(0.0), g));
    corpus.push_back(synth(GeneratorSpec::gaussian(Pt::Zero(), 1.0), g));

    for (const auto& f : corpus) {
        for (double q : {1.0, kInf}) {
            const auto fl = singular_set(wavefront_set(f, one, q, cfg, Flavor::FL));
            for (double p : {1.0, kInf}) {
                cfg.p = p;
                const auto m = singular_set(wavefront_set(f, one, q, cfg, Flavor::M));
                const auto w = singular_set(wavefront_set(f, one, q, cfg, Flavor::W));
                CHECK(m == fl);
                CHECK(w == fl);
            }
        }
    }
}
