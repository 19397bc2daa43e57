#include <doctest.h>

#include "conefront/symcalc.hpp"

#include <set>

using namespace conefront;

namespace {

SymbolSpec xxi_symbol() {
    SymbolSpec s = SymbolSpec::from_callable(
        "x*xi", 1, [](const Pt& x, const Pt& xi) { return Complex(x[0] * xi[0], 0.0); }, false,
        false);
    s.partial_fn = [](const std::array<int, 2>& al, const std::array<int, 2>& be, const Pt& x,
                      const Pt& xi) -> Complex {
        if (al[0] == 0 && be[0] == 0) return Complex(x[0] * xi[0], 0.0);
        if (al[0] == 1 && be[0] == 0) return Complex(xi[0], 0.0);
        if (al[0] == 0 && be[0] == 1) return Complex(x[0], 0.0);
        if (al[0] == 1 && be[0] == 1) return Complex(1.0, 0.0);
        return Complex(0.0, 0.0);
    };
    return s;
}

}  // namespace

TEST_CASE("symbol evaluation presets") {
    CHECK(eval_symbol(SymbolSpec::heat_symbol(), Pt::Zero(), Pt(1.0, 1.0)) == Complex(1.0, 1.0));
    // e^{-i <x0, xi>} at x0 = 2, xi = pi
    const Complex v = eval_symbol(SymbolSpec::phase(Pt(2.0, 0.0), 1), Pt::Zero(), Pt(kPi, 0.0));
    CHECK(std::abs(v - Complex(1.0, 0.0)) <= 1e-12);
    CHECK(eval_symbol(SymbolSpec::multiplier_bracket(2.0, 2), Pt::Zero(), Pt(1.0, 1.0)).real() ==
          doctest::Approx(3.0));
}

TEST_CASE("check_symbol_class membership sweeps") {
    SUBCASE("bracket^2 lies in S^{(bracket^2)}_{1,0} with constant near 1") {
        const LatticeSpec lat = LatticeSpec::xi_box(1, 64.0, 257);
        const auto rep = check_symbol_class(SymbolSpec::multiplier_bracket(2.0, 1),
                                            WeightSpec::japanese_bracket(2.0, 1), 1.0, 0.0, 2, lat);
        CHECK(rep.passes());
        for (const auto& e : rep.entries) CHECK(e.sup_ratio <= 3.0);
    }
    SUBCASE("heat symbol lies in S^{(heat)}_{1/2,0}") {
        const LatticeSpec lat = LatticeSpec::xi_box(2, 48.0, 49);
        const auto rep =
            check_symbol_class(SymbolSpec::heat_symbol(), WeightSpec::heat(), 0.5, 0.0, 2, lat);
        CHECK(rep.passes());
    }
    SUBCASE("phase symbol: order (0,0) passes, order (1,0) fails at |beta| = 1") {
        const LatticeSpec lat = LatticeSpec::xi_box(1, 64.0, 257);
        const SymbolSpec ph = SymbolSpec::phase(Pt(2.0, 0.0), 1);
        const WeightSpec one = WeightSpec::constant(1.0, 1);
        CHECK(check_symbol_class(ph, one, 0.0, 0.0, 2, lat).passes());
        const auto rep = check_symbol_class(ph, one, 1.0, 0.0, 1, lat);
        CHECK_FALSE(rep.passes());
        const auto* e = rep.find({0, 0}, {1, 0});
        REQUIRE(e != nullptr);
        CHECK_FALSE(e->bounded);
    }
    SUBCASE("order 0 reduces to sup |a|/omega0") {
        const LatticeSpec lat = LatticeSpec::xi_box(1, 32.0, 129);
        const auto rep = check_symbol_class(SymbolSpec::multiplier_bracket(2.0, 1),
                                            WeightSpec::japanese_bracket(2.0, 1), 1.0, 0.0, 0, lat);
        REQUIRE(rep.entries.size() == 1);
        CHECK(rep.entries[0].sup_ratio == doctest::Approx(1.0));
    }
}

TEST_CASE("ellipticity margins") {
    const std::vector<Pt> xp{Pt::Zero()};

    SUBCASE("heat vs heat weight: above the analytic bound") {
        const SymbolSpec heat = SymbolSpec::heat_symbol();
        const double m = ellipticity_margin(heat, WeightSpec::heat(), xp, 8.0, 64.0);
        // |a|/omega >= (1/sqrt(2)) w/(1+w), w = xi^2 + |tau| >= R on the probe set
        const double analytic = (1.0 / std::sqrt(2.0)) * 8.0 / (1.0 + 8.0);
        CHECK(m >= analytic);
        CHECK(m >= 1.0 / std::sqrt(2.0) - 0.05);
    }
    SUBCASE("heat vs classical bracket^2: margin collapses along the tau axis") {
        const double m =
            ellipticity_margin(SymbolSpec::heat_symbol(), WeightSpec::japanese_bracket(2.0, 2), xp,
                               8.0, 64.0);
        CHECK(m <= 0.05);
    }
    SUBCASE("bracket^2 against itself has margin exactly 1") {
        const double m = ellipticity_margin(SymbolSpec::multiplier_bracket(2.0, 1),
                                            WeightSpec::japanese_bracket(2.0, 1), xp, 2.0, 64.0);
        CHECK(m == doctest::Approx(1.0));
    }
    SUBCASE("empty probe set errors") {
        CHECK_THROWS_AS(ellipticity_margin(SymbolSpec::multiplier_bracket(2.0, 1),
                                           WeightSpec::japanese_bracket(2.0, 1), {}, 2.0, 64.0),
                        DomainError);
    }
}

TEST_CASE("characteristic sets") {
    const ConePartition cones = make_cone_partition(2, 8, 1.5);
    const std::vector<Pt> centers{Pt::Zero(), Pt(0.5, -0.5)};
    CharParams prm;
    prm.R = 8.0;
    prm.xi_max = 64.0;
    prm.c_min = 0.05;

    SUBCASE("heat symbol with its hypoelliptic weight: empty") {
        const auto est = char_set(SymbolSpec::heat_symbol(), WeightSpec::heat(), cones, centers, prm);
        CHECK(est.empty_char());
    }
    SUBCASE("heat symbol with the classical weight flags exactly the tau-axis sectors") {
        const auto est = char_set(SymbolSpec::heat_symbol(), WeightSpec::japanese_bracket(2.0, 2),
                                  cones, centers, prm);
        std::set<int> expect;
        for (int j = 0; j < 8; ++j) {
            const Sector w = cones.widened(j);
            if (w.contains(Pt(0.0, 1.0)) || w.contains(Pt(0.0, -1.0))) expect.insert(j);
        }
        REQUIRE_FALSE(expect.empty());
        for (const auto& e : est.entries)
            CHECK(e.characteristic == (expect.count(e.sector) > 0));
    }
    SUBCASE("directional symbol: characteristic exactly where the cutoff vanishes") {
        const SymbolSpec dir = SymbolSpec::directional(1.0, 0.0, 0.5, 0.9, 2);
        const auto est = char_set(dir, WeightSpec::japanese_bracket(1.0, 2), cones, centers,
                                  CharParams{1.0, 8.0, 0.05, 64.0, 48, 8, 3});
        // sectors whose widened arc meets the dead cone around theta = 0
        std::set<int> flagged;
        for (const auto& e : est.entries)
            if (e.characteristic) flagged.insert(e.sector);
        CHECK(flagged.count(0) == 1);
        CHECK(flagged.count(7) == 1);
        CHECK(flagged.count(3) == 0);
        CHECK(flagged.count(4) == 0);
        // every center reports the same sectors
        for (const auto& e : est.entries)
            CHECK(e.characteristic == (flagged.count(e.sector) > 0));
    }
    SUBCASE("elliptic implies empty at 2x threshold") {
        const auto est = char_set(SymbolSpec::multiplier_bracket(2.0, 2),
                                  WeightSpec::japanese_bracket(2.0, 2), cones, centers, prm);
        for (const auto& e : est.entries) CHECK(e.margin >= 2.0 * est.c_min);
        CHECK(est.empty_char());
    }
}

TEST_CASE("compose_symbols") {
    const Grid g = Grid::line(16, -8.0, 8.0);
    const SymbolGrid sg{g, true};

    SUBCASE("(a # 1)_N = a exactly for all N") {
        const SymbolSpec one = SymbolSpec::from_callable(
            "1", 1, [](const Pt&, const Pt&) { return Complex(1.0, 0.0); }, true, true);
        const SymbolSpec a = xxi_symbol();
        for (int N : {0, 1, 2, 4}) {
            const SymbolSpec c = compose_symbols(a, one, N, sg);
            const SymbolSamples as = a.sample(sg);
            CHECK((c.samples->v - as.v).abs().maxCoeff() == 0.0);
        }
    }
    SUBCASE("frequency multipliers compose to their product") {
        const SymbolSpec m1 = SymbolSpec::multiplier_bracket(1.0, 1);
        const SymbolSpec m2 = SymbolSpec::multiplier_bracket(2.0, 1);
        const SymbolSpec c = compose_symbols(m1, m2, 4, sg);
        CHECK_FALSE(c.samples->grid.with_x);
        const SymbolGrid sgx{g, false};
        const ArrayXc expect = m1.sample(sgx).v * m2.sample(sgx).v;
        CHECK((c.samples->v - expect).abs().maxCoeff() == 0.0);
    }
    SUBCASE("xxi # xxi at N=1 equals the hand expansion x^2 xi^2 - i x xi") {
        const SymbolSpec a = xxi_symbol();
        const SymbolSpec c = compose_symbols(a, a, 1, sg);
        double worst = 0.0;
        for (Index ix = 0; ix < sg.n_x(); ++ix) {
            for (Index j = 0; j < sg.n_xi(); ++j) {
                const double x = sg.x_point(ix)[0], xi = sg.xi_point(j)[0];
                worst = std::max(worst,
                                 std::abs(c.samples->at(ix, j) - Complex(x * x * xi * xi, -x * xi)));
            }
        }
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("parametrix") {
    SUBCASE("multiplier inversion is exact: h1 vanishes on the cone region") {
        const Grid g = Grid::line(256, -20.0, 20.0);
        const SymbolGrid sg{g, false};
        const SymbolSpec a = SymbolSpec::multiplier_bracket(2.0, 1);
        const auto res = parametrix(a, WeightSpec::japanese_bracket(2.0, 1), 1.0,
                                    ConeRegion{ConePartition::everything(1), 2.0}, 1, 2, sg);
        REQUIRE(res.residuals.size() == 1);
        CHECK(res.residuals[0].raw_max <= 1e-12);
        CHECK(res.residuals[0].decays());
    }
    SUBCASE("heat symbol: residuals vanish (x-independent calculus is exact)") {
        const Grid g = Grid::make(2, {64, 64}, {kPi / 64.0, kPi / 64.0}, {-kPi / 2.0, -kPi / 2.0});
        const SymbolGrid sg{g, false};
        const auto res = parametrix(SymbolSpec::heat_symbol(), WeightSpec::heat(), 0.5,
                                    ConeRegion{ConePartition::everything(2), 4.0}, 3, 2, sg);
        REQUIRE(res.residuals.size() == 3);
        CHECK(res.mu == doctest::Approx(0.5));
        for (const auto& row : res.residuals) {
            CHECK(row.raw_max <= 1e-12);
            CHECK(row.decays());
        }
    }
    SUBCASE("x-modulated elliptic symbol: nontrivial residuals of the right order") {
        const Grid g = Grid::line(256, -20.0, 20.0);
        const SymbolGrid sg{g, true};
        const SymbolSpec a = SymbolSpec::modulated_bracket(1.0, 0.4, kTwoPi / 40.0, 2.0, 1);
        const auto res = parametrix(a, WeightSpec::japanese_bracket(2.0, 1), 1.0,
                                    ConeRegion{ConePartition::everything(1), 2.0}, 3, 2, sg);
        REQUIRE(res.residuals.size() == 3);
        for (const auto& row : res.residuals) {
            CHECK(row.raw_max > 1e-8);  // the machinery is actually exercised
            CHECK(row.decays());
        }
        // per-annulus |h_2| <= |h_1| on the outer half of annuli
        const auto& r1 = res.residuals[0];
        const auto& r2 = res.residuals[1];
        REQUIRE(r1.ks == r2.ks);
        for (size_t i = r1.ks.size() / 2; i < r1.ks.size(); ++i)
            CHECK(r2.raw_sup[i] <= r1.raw_sup[i]);
    }
    SUBCASE("non-elliptic region is a precondition error") {
        const Grid g = Grid::line(128, -20.0, 20.0);
        const SymbolGrid sg{g, false};
        const SymbolSpec dir = SymbolSpec::directional(1.0, kPi, 0.5, 0.9, 1);  // dead on xi > 0
        CHECK_THROWS_AS(parametrix(dir, WeightSpec::japanese_bracket(1.0, 1), 1.0,
                                   ConeRegion{make_cone_partition(1, 2).base(0), 2.0}, 1, 2, sg),
                        DomainError);
    }
}
