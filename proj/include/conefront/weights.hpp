#pragma once

#include "conefront/core.hpp"

#include <nlohmann/json_fwd.hpp>

namespace conefront {

/// Japanese bracket <xi> = (1 + |xi|^2)^{1/2} over the first d coordinates.
inline double bracket(const Pt& xi, int d) {
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += xi[a] * xi[a];
    return std::sqrt(1.0 + s);
}

/// Evaluable weight function omega(x, xi) > 0 with regularity metadata.
struct WeightSpec {
    int d = 1;
    std::string id;
    bool x_independent = true;
    std::function<double(const Pt&, const Pt&)> fn;

    static WeightSpec constant(double c = 1.0, int d = 1);
    static WeightSpec japanese_bracket(double s, int d = 1);
    /// 1 + |a(xi)| for a polynomial a given as monomials {coef, exponents}.
    static WeightSpec hypoelliptic(std::vector<std::pair<double, std::array<int, 2>>> monomials, int d);
    /// The heat-operator weight 1 + |xi|^2 + |tau| on R^2, variables (xi, tau).
    static WeightSpec heat();
    static WeightSpec expression(const std::string& expr, int d);
    /// Product of powers prod_i w_i^{p_i}; negative powers give quotients.
    static WeightSpec product(std::vector<std::pair<WeightSpec, double>> factors);

    static WeightSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

double eval_weight(const WeightSpec& w, const Pt& x, const Pt& xi);

/// Rectangular sampling lattice in phase space.
struct LatticeSpec {
    int d = 1;
    Pt x_min = Pt::Zero(), x_max = Pt::Zero();
    std::array<int, 2> x_count{1, 1};
    Pt xi_min = Pt::Zero(), xi_max = Pt::Zero();
    std::array<int, 2> xi_count{1, 1};

    /// xi in [-r, r]^d with n points per axis, x frozen at 0.
    static LatticeSpec xi_box(int d, double r, int n);
    /// x and xi boxes [-rx, rx]^d x [-rxi, rxi]^d.
    static LatticeSpec phase_box(int d, double rx, int nx, double rxi, int nxi);

    std::vector<Pt> x_points() const;
    std::vector<Pt> xi_points() const;
    double x_step(int axis) const;
    double xi_step(int axis) const;
};

struct ModerateReport {
    double estimated_C = 0.0;
    double max_violation_ratio = 0.0;
    long samples_tested = 0;
    bool pass = true;
};

ModerateReport check_moderate(const WeightSpec& w, const WeightSpec& v, const LatticeSpec& lattice);

/// Per-(alpha, beta) derivative-ratio estimates for the P_{rho,delta} test.
struct ClassEntry {
    std::array<int, 2> alpha{0, 0};  // x multi-index
    std::array<int, 2> beta{0, 0};   // xi multi-index
    double sup_ratio = 0.0;
    double shell_slope = 0.0;
    bool bounded = true;
};

struct ClassReport {
    double rho = 0.0, delta = 0.0;
    int max_order = 0;
    std::vector<ClassEntry> entries;
    bool passes() const {
        for (const auto& e : entries)
            if (!e.bounded) return false;
        return true;
    }
    const ClassEntry* find(std::array<int, 2> alpha, std::array<int, 2> beta) const;
};

ClassReport check_class_rho_delta(const WeightSpec& w, double rho, double delta, int max_order,
                                  const LatticeSpec& lattice);

/// Central finite difference of f with multi-order derivatives in (x, xi).
double finite_difference(const std::function<double(const Pt&, const Pt&)>& f,
                         std::array<int, 2> alpha, std::array<int, 2> beta, const Pt& x,
                         const Pt& xi, const Pt& hx, const Pt& hxi);

/// Shared shell-slope boundedness test: fits log2(sup ratio per dyadic |xi|
/// shell) against the shell index; bounded iff slope <= 0.1.
bool shell_bounded(const std::vector<std::pair<double, double>>& xi_norm_and_ratio, double* slope_out);

}  // namespace conefront
